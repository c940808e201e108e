#include "sampler.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <thread>

#include "errors.hpp"

namespace nowcast {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kFamilyCount = 14;
// Rates above this abort the run: the triangle would need astronomical counts
// and the integer draws would overflow long before.
constexpr double kMaxRate = 1e12;

// n-dependent part of the beta-binomial log pmf; everything else cancels when
// only the trial count moves.
double bb_trial_part(long long n, long long z, double a, double b) {
  if (n < z) return kNegInf;
  double nd = static_cast<double>(n), zd = static_cast<double>(z);
  return std::lgamma(nd + 1.0) - std::lgamma(nd - zd + 1.0) + std::lgamma(nd - zd + b) -
         std::lgamma(nd + a + b);
}

// nu-dependent part: a + b = phi is fixed, so those terms cancel.
double bb_hazard_part(long long z, long long n, double nu, double phi) {
  if (!(nu > 0.0) || !(nu < 1.0)) return kNegInf;
  double a = nu * phi, b = (1.0 - nu) * phi;
  return std::lgamma(static_cast<double>(z) + a) +
         std::lgamma(static_cast<double>(n - z) + b) - std::lgamma(a) - std::lgamma(b);
}

double poisson_piece(long long y, double loglam) {
  return static_cast<double>(y) * loglam - std::exp(loglam);
}

// Trend log density of county j at an explicit level (delta_bar + centered d).
double trend_block(const ModelState& s, const ModelData& d, int j, double level) {
  double sum = log_normal_density(s.delta(j, 0), level, s.tau2_delta);
  for (int t = 1; t < d.len; ++t)
    sum += log_normal_density(s.delta(j, t),
                              level + s.rho_delta * (s.delta(j, t - 1) - level), s.tau2_delta);
  return sum;
}

// Hazard-chain log density for county i at delay `dl` with overrides for the
// intercept, the report-day effects, and the AR coefficient.
double psi_chain_block(const ModelState& s, const ModelData& d, int i, int dl, double beta_d,
                       const Eigen::Matrix<double, 6, 1>& xi_row, double rho) {
  double mu_prev = beta_d + d.design.v(0, dl).dot(xi_row);
  double sum = log_normal_density(s.psi_at(i, 0, dl), mu_prev, s.tau2_psi);
  for (int t = 1; t < d.len; ++t) {
    double mu = beta_d + d.design.v(t, dl).dot(xi_row);
    sum += log_normal_density(s.psi_at(i, t, dl), mu + rho * (s.psi_at(i, t - 1, dl) - mu_prev),
                              s.tau2_psi);
    mu_prev = mu;
  }
  return sum;
}

}  // namespace

void SamplerConfig::validate() const {
  if (iterations < 1) throw InputError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw InputError("burn-in must be non-negative and smaller than iterations");
  if (thin < 1) throw InputError("thin must be at least 1");
  if (iterations - burn_in < thin) throw InputError("no draws retained: thin exceeds kept iterations");
  if (chains < 1) throw InputError("need at least one chain");
  if (adapt_interval < 1) throw InputError("adapt interval must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw InputError("target acceptance must be inside (0,1)");
  if (threads < 1) throw InputError("threads must be positive");
}

int MultiChainDraws::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return static_cast<int>(c);
  return -1;
}

Eigen::VectorXd MultiChainDraws::pooled(int col) const {
  long long total = 0;
  for (const auto& ch : chains) total += ch.values.rows();
  Eigen::VectorXd out(total);
  long long at = 0;
  for (const auto& ch : chains) {
    out.segment(at, ch.values.rows()) = ch.values.col(col);
    at += ch.values.rows();
  }
  return out;
}

const char* family_name(NodeFamily f) {
  switch (f) {
    case NodeFamily::alpha: return "alpha";
    case NodeFamily::trend: return "trend";
    case NodeFamily::trend_mean: return "trend_mean";
    case NodeFamily::spatial: return "spatial";
    case NodeFamily::weekday_onset: return "weekday_onset";
    case NodeFamily::weekday_onset_mean: return "weekday_onset_mean";
    case NodeFamily::weekday_report: return "weekday_report";
    case NodeFamily::weekday_report_mean: return "weekday_report_mean";
    case NodeFamily::delay_intercept: return "delay_intercept";
    case NodeFamily::dispersion: return "dispersion";
    case NodeFamily::hazard: return "hazard";
    case NodeFamily::trend_ar: return "trend_ar";
    case NodeFamily::hazard_ar: return "hazard_ar";
    case NodeFamily::latent_total: return "latent_total";
  }
  return "?";
}

namespace node_delta {

double alpha(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int i, int t,
             double v) {
  double ll_old = log_lambda(i, t, s, d);
  double ll_new = ll_old + (v - s.alpha(i, t));
  if (!(std::abs(ll_new) < hp.log_lambda_guard)) return kNegInf;
  double sum = poisson_piece(s.y(i, t), ll_new) - poisson_piece(s.y(i, t), ll_old);
  if (t == 0) {
    sum += log_normal_density(v, 0.0, hp.alpha1_var) -
           log_normal_density(s.alpha(i, 0), 0.0, hp.alpha1_var);
  } else {
    double mean = s.alpha(i, t - 1) + s.delta(i, t - 1);
    sum += log_normal_density(v, mean, s.tau2_alpha) -
           log_normal_density(s.alpha(i, t), mean, s.tau2_alpha);
  }
  if (t + 1 < d.len) {
    double lead = s.alpha(i, t + 1) - s.delta(i, t);
    sum += log_normal_density(lead, v, s.tau2_alpha) -
           log_normal_density(lead, s.alpha(i, t), s.tau2_alpha);
  }
  return sum;
}

double trend(const ModelState& s, const ModelData& d, int i, int t, double v) {
  Eigen::VectorXd c = s.centered_d();
  double level = s.delta_bar + c(i);
  double sum = 0.0;
  if (t == 0) {
    sum += log_normal_density(v, level, s.tau2_delta) -
           log_normal_density(s.delta(i, 0), level, s.tau2_delta);
  } else {
    double mean = level + s.rho_delta * (s.delta(i, t - 1) - level);
    sum += log_normal_density(v, mean, s.tau2_delta) -
           log_normal_density(s.delta(i, t), mean, s.tau2_delta);
  }
  if (t + 1 < d.len) {
    double lead = s.delta(i, t + 1);
    sum += log_normal_density(lead, level + s.rho_delta * (v - level), s.tau2_delta) -
           log_normal_density(lead, level + s.rho_delta * (s.delta(i, t) - level),
                              s.tau2_delta);
    double alead = s.alpha(i, t + 1);
    sum += log_normal_density(alead, s.alpha(i, t) + v, s.tau2_alpha) -
           log_normal_density(alead, s.alpha(i, t) + s.delta(i, t), s.tau2_alpha);
  }
  return sum;
}

double trend_mean(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, double v) {
  Eigen::VectorXd c = s.centered_d();
  double sum = 0.0;
  for (int j = 0; j < d.n; ++j)
    sum += trend_block(s, d, j, v + c(j)) - trend_block(s, d, j, s.delta_bar + c(j));
  sum += log_normal_density(v, 0.0, hp.effect_var) -
         log_normal_density(s.delta_bar, 0.0, hp.effect_var);
  return sum;
}

double spatial(const ModelState& s, const ModelData& d, int i, double v) {
  const int n = d.n;
  double mean_old = s.d.mean();
  double mean_new = mean_old + (v - s.d(i)) / n;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    double raw = j == i ? v : s.d(j);
    double lvl_new = s.delta_bar + raw - mean_new;
    double lvl_old = s.delta_bar + s.d(j) - mean_old;
    sum += trend_block(s, d, j, lvl_new) - trend_block(s, d, j, lvl_old);
  }
  for (int j : d.graph->neighbors[i]) {
    double r_new = v - s.d(j), r_old = s.d(i) - s.d(j);
    sum += -0.5 * (r_new * r_new - r_old * r_old) / s.tau2_d;
  }
  return sum;
}

double weekday_onset(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int i,
                     int k, double v) {
  double sum = 0.0;
  for (int t = 0; t < d.len; ++t) {
    double x = d.design.rows()(t, k);
    if (x == 0.0) continue;
    double ll_old = log_lambda(i, t, s, d);
    double ll_new = ll_old + x * (v - s.eta(i, k));
    if (!(std::abs(ll_new) < hp.log_lambda_guard)) return kNegInf;
    sum += poisson_piece(s.y(i, t), ll_new) - poisson_piece(s.y(i, t), ll_old);
  }
  sum += log_normal_density(v, s.eta_bar(k), s.tau2_eta) -
         log_normal_density(s.eta(i, k), s.eta_bar(k), s.tau2_eta);
  return sum;
}

double weekday_onset_mean(const ModelState& s, const HyperPriorSpec& hp, int k, double v) {
  double sum = log_normal_density(v, 0.0, hp.effect_var) -
               log_normal_density(s.eta_bar(k), 0.0, hp.effect_var);
  for (int i = 0; i < s.eta.rows(); ++i)
    sum += log_normal_density(s.eta(i, k), v, s.tau2_eta) -
           log_normal_density(s.eta(i, k), s.eta_bar(k), s.tau2_eta);
  return sum;
}

double weekday_report(const ModelState& s, const ModelData& d, int i, int k, double v) {
  Eigen::Matrix<double, 6, 1> xi_new = s.xi.row(i).transpose();
  Eigen::Matrix<double, 6, 1> xi_old = xi_new;
  xi_new(k) = v;
  double sum = 0.0;
  for (int dl = 0; dl < d.dmax; ++dl)
    sum += psi_chain_block(s, d, i, dl, s.beta(dl), xi_new, s.rho_psi) -
           psi_chain_block(s, d, i, dl, s.beta(dl), xi_old, s.rho_psi);
  sum += log_normal_density(v, s.xi_bar(k), s.tau2_xi) -
         log_normal_density(s.xi(i, k), s.xi_bar(k), s.tau2_xi);
  return sum;
}

double weekday_report_mean(const ModelState& s, const HyperPriorSpec& hp, int k, double v) {
  double sum = log_normal_density(v, 0.0, hp.effect_var) -
               log_normal_density(s.xi_bar(k), 0.0, hp.effect_var);
  for (int i = 0; i < s.xi.rows(); ++i)
    sum += log_normal_density(s.xi(i, k), v, s.tau2_xi) -
           log_normal_density(s.xi(i, k), s.xi_bar(k), s.tau2_xi);
  return sum;
}

double delay_intercept(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp,
                       int delay, double v) {
  double sum = log_normal_density(v, 0.0, hp.beta_var) -
               log_normal_density(s.beta(delay), 0.0, hp.beta_var);
  for (int i = 0; i < d.n; ++i) {
    Eigen::Matrix<double, 6, 1> xi_row = s.xi.row(i).transpose();
    sum += psi_chain_block(s, d, i, delay, v, xi_row, s.rho_psi) -
           psi_chain_block(s, d, i, delay, s.beta(delay), xi_row, s.rho_psi);
  }
  return sum;
}

double dispersion(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int delay,
                  double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return kNegInf;
  double sum = log_gamma_density(v, hp.phi_shape, hp.phi_rate) -
               log_gamma_density(s.phi(delay), hp.phi_shape, hp.phi_rate);
  for (int i = 0; i < d.n; ++i)
    for (int t = 0; t < d.len; ++t) {
      if (d.n_terms[t] <= delay) continue;
      long long n = s.y(i, t) - d.prefix(i, t, delay);
      long long z = d.z_at(i, t, delay);
      double nu = expit(s.psi_at(i, t, delay));
      sum += log_beta_binomial(z, n, nu * v, (1.0 - nu) * v) -
             log_beta_binomial(z, n, nu * s.phi(delay), (1.0 - nu) * s.phi(delay));
    }
  return sum;
}

double hazard(const ModelState& s, const ModelData& d, int i, int t, int delay, double v) {
  double cur = s.psi_at(i, t, delay);
  Eigen::Matrix<double, 6, 1> xi_row = s.xi.row(i).transpose();
  auto mu = [&](int tt) { return s.beta(delay) + d.design.v(tt, delay).dot(xi_row); };
  double sum = 0.0;
  if (t == 0) {
    sum += log_normal_density(v, mu(0), s.tau2_psi) -
           log_normal_density(cur, mu(0), s.tau2_psi);
  } else {
    double mean = mu(t) + s.rho_psi * (s.psi_at(i, t - 1, delay) - mu(t - 1));
    sum += log_normal_density(v, mean, s.tau2_psi) - log_normal_density(cur, mean, s.tau2_psi);
  }
  if (t + 1 < d.len) {
    double lead = s.psi_at(i, t + 1, delay);
    double mu_t = mu(t), mu_next = mu(t + 1);
    sum += log_normal_density(lead, mu_next + s.rho_psi * (v - mu_t), s.tau2_psi) -
           log_normal_density(lead, mu_next + s.rho_psi * (cur - mu_t), s.tau2_psi);
  }
  if (delay < d.n_terms[t]) {
    long long n = s.y(i, t) - d.prefix(i, t, delay);
    long long z = d.z_at(i, t, delay);
    double piece_new = bb_hazard_part(z, n, expit(v), s.phi(delay));
    if (piece_new == kNegInf) return kNegInf;
    sum += piece_new - bb_hazard_part(z, n, expit(cur), s.phi(delay));
  }
  return sum;
}

double trend_ar(const ModelState& s, const ModelData& d, double v) {
  if (!(std::abs(v) < 1.0)) return kNegInf;
  Eigen::VectorXd c = s.centered_d();
  double sum = 0.0;
  for (int i = 0; i < d.n; ++i) {
    double level = s.delta_bar + c(i);
    for (int t = 1; t < d.len; ++t) {
      double lag = s.delta(i, t - 1) - level;
      sum += log_normal_density(s.delta(i, t), level + v * lag, s.tau2_delta) -
             log_normal_density(s.delta(i, t), level + s.rho_delta * lag, s.tau2_delta);
    }
  }
  return sum;
}

double hazard_ar(const ModelState& s, const ModelData& d, double v) {
  if (!(std::abs(v) < 1.0)) return kNegInf;
  double sum = 0.0;
  for (int i = 0; i < d.n; ++i) {
    Eigen::Matrix<double, 6, 1> xi_row = s.xi.row(i).transpose();
    for (int dl = 0; dl < d.dmax; ++dl) {
      double mu_prev = s.beta(dl) + d.design.v(0, dl).dot(xi_row);
      for (int t = 1; t < d.len; ++t) {
        double mu = s.beta(dl) + d.design.v(t, dl).dot(xi_row);
        double lag = s.psi_at(i, t - 1, dl) - mu_prev;
        sum += log_normal_density(s.psi_at(i, t, dl), mu + v * lag, s.tau2_psi) -
               log_normal_density(s.psi_at(i, t, dl), mu + s.rho_psi * lag, s.tau2_psi);
        mu_prev = mu;
      }
    }
  }
  return sum;
}

double latent_total(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int i,
                    int t, long long v) {
  if (v < 0) return kNegInf;
  double ll = log_lambda(i, t, s, d);
  if (!(std::abs(ll) < hp.log_lambda_guard)) return kNegInf;
  long long y_old = s.y(i, t);
  double sum = static_cast<double>(v - y_old) * ll -
               (std::lgamma(static_cast<double>(v) + 1.0) -
                std::lgamma(static_cast<double>(y_old) + 1.0));
  for (int dl = 0; dl < d.n_terms[t]; ++dl) {
    long long z = d.z_at(i, t, dl);
    long long pre = d.prefix(i, t, dl);
    double nu = expit(s.psi_at(i, t, dl));
    double a = nu * s.phi(dl), b = (1.0 - nu) * s.phi(dl);
    double piece_new = bb_trial_part(v - pre, z, a, b);
    if (piece_new == kNegInf) return kNegInf;
    sum += piece_new - bb_trial_part(y_old - pre, z, a, b);
  }
  return sum;
}

}  // namespace node_delta

ModelState initialize(const ModelData& data) {
  const int n = data.n, len = data.len, dmax = data.dmax;
  ModelState s = ModelState::zeros(n, len, dmax);
  s.tau2_alpha = s.tau2_delta = s.tau2_d = s.tau2_eta = s.tau2_psi = s.tau2_xi = 0.1;
  s.rho_delta = s.rho_psi = 0.5;
  s.phi.setConstant(10.0);

  // Pooled delay distribution from the fully observed rows.
  std::vector<double> bucket(dmax + 1, 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t) {
      if (!data.pinned[t]) continue;
      for (int d = 0; d <= dmax; ++d) {
        bucket[d] += static_cast<double>(data.z_at(i, t, d));
        total += static_cast<double>(data.z_at(i, t, d));
      }
    }
  std::vector<double> logit_hazard(dmax, 0.0);
  std::vector<double> cumfrac(dmax + 2, 1.0);  // cumfrac[m] = fraction within first m delays
  double seen = 0.0;
  for (int d = 0; d <= dmax; ++d) {
    double remaining = total - seen;
    if (d < dmax) {
      double h = remaining > 0.0 && bucket[d] > 0.0 ? bucket[d] / remaining
                                                    : 1.0 / (dmax + 1 - d);
      double lg = h <= 0.0 ? -5.0 : h >= 1.0 ? 5.0 : std::log(h / (1.0 - h));
      logit_hazard[d] = std::clamp(lg, -5.0, 5.0);
    }
    seen += bucket[d];
    cumfrac[d + 1] = total > 0.0 ? seen / total : 1.0;
  }
  cumfrac[0] = total > 0.0 ? 0.0 : 1.0;

  for (int d = 0; d < dmax; ++d) s.beta(d) = logit_hazard[d];
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t)
      for (int d = 0; d < dmax; ++d) s.psi_at(i, t, d) = logit_hazard[d];

  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t) {
      long long sc = data.s_cond[static_cast<std::size_t>(i) * len + t];
      s.alpha(i, t) = std::log((static_cast<double>(sc) + 1.0) /
                               static_cast<double>(data.graph->population[i]));
      if (data.pinned[t]) {
        s.y(i, t) = data.y_full[static_cast<std::size_t>(i) * len + t];
      } else {
        double c = total > 0.0 ? cumfrac[data.n_terms[t]] : 1.0;
        double scaled = std::round(static_cast<double>(sc) / std::max(c, 0.05));
        s.y(i, t) = std::max(sc, static_cast<long long>(scaled));
      }
    }
  return s;
}

std::vector<int> monitored_trend_days(const ModelData& data) {
  std::vector<int> days;
  for (int t = std::max(0, data.len - 21); t < data.len; ++t) days.push_back(t);
  return days;
}

std::vector<int> monitored_total_days(const ModelData& data) {
  std::vector<int> days;
  for (int t = std::max(0, data.len - 1 - data.dmax); t < data.len; ++t) days.push_back(t);
  return days;
}

std::vector<std::string> monitor_columns(const ModelData& data, const SamplerConfig& cfg) {
  std::vector<std::string> cols;
  const auto& ids = data.graph->county_ids;
  for (int i = 0; i < data.n; ++i)
    for (int t : monitored_trend_days(data))
      cols.push_back("delta_" + ids[i] + "_" + format_date(data.window.date_of_day(t)));
  for (int i = 0; i < data.n; ++i)
    for (int t : monitored_total_days(data))
      cols.push_back("y_" + ids[i] + "_" + format_date(data.window.date_of_day(t)));
  for (const char* h : {"tau2_alpha", "tau2_delta", "tau2_d", "tau2_eta", "tau2_psi",
                        "tau2_xi", "rho_delta", "rho_psi", "delta_bar"})
    cols.push_back(h);
  for (int d = 0; d < data.dmax; ++d) cols.push_back("beta_" + std::to_string(d));
  if (cfg.monitor_full_state) {
    for (int d = 0; d < data.dmax; ++d) cols.push_back("phi_" + std::to_string(d));
    for (int i = 0; i < data.n; ++i) cols.push_back("d_" + ids[i]);
    for (int i = 0; i < data.n; ++i)
      for (int t = 0; t < data.len; ++t)
        cols.push_back("alpha_" + ids[i] + "_" + format_date(data.window.date_of_day(t)));
    for (int k = 0; k < 6; ++k) cols.push_back("eta_bar_" + std::to_string(k + 1));
    for (int k = 0; k < 6; ++k) cols.push_back("xi_bar_" + std::to_string(k + 1));
    for (int i = 0; i < data.n; ++i)
      for (int k = 0; k < 6; ++k) cols.push_back("eta_" + ids[i] + "_" + std::to_string(k + 1));
    for (int i = 0; i < data.n; ++i)
      for (int k = 0; k < 6; ++k) cols.push_back("xi_" + ids[i] + "_" + std::to_string(k + 1));
  }
  return cols;
}

Eigen::VectorXd monitor_values(const ModelState& s, const ModelData& data,
                               const SamplerConfig& cfg) {
  std::vector<double> vals;
  for (int i = 0; i < data.n; ++i)
    for (int t : monitored_trend_days(data)) vals.push_back(s.delta(i, t));
  for (int i = 0; i < data.n; ++i)
    for (int t : monitored_total_days(data)) vals.push_back(static_cast<double>(s.y(i, t)));
  for (double h : {s.tau2_alpha, s.tau2_delta, s.tau2_d, s.tau2_eta, s.tau2_psi, s.tau2_xi,
                   s.rho_delta, s.rho_psi, s.delta_bar})
    vals.push_back(h);
  for (int d = 0; d < data.dmax; ++d) vals.push_back(s.beta(d));
  if (cfg.monitor_full_state) {
    for (int d = 0; d < data.dmax; ++d) vals.push_back(s.phi(d));
    for (int i = 0; i < data.n; ++i) vals.push_back(s.d(i));
    for (int i = 0; i < data.n; ++i)
      for (int t = 0; t < data.len; ++t) vals.push_back(s.alpha(i, t));
    for (int k = 0; k < 6; ++k) vals.push_back(s.eta_bar(k));
    for (int k = 0; k < 6; ++k) vals.push_back(s.xi_bar(k));
    for (int i = 0; i < data.n; ++i)
      for (int k = 0; k < 6; ++k) vals.push_back(s.eta(i, k));
    for (int i = 0; i < data.n; ++i)
      for (int k = 0; k < 6; ++k) vals.push_back(s.xi(i, k));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

McmcSampler::McmcSampler(const ModelData& data, const HyperPriorSpec& hp,
                         const SamplerConfig& cfg, int chain_index)
    : data_(data),
      hp_(hp),
      cfg_(cfg),
      state_(initialize(data)),
      rng_(cfg.seed, static_cast<std::uint64_t>(chain_index)) {
  auto make = [&](NodeFamily f, std::size_t count, double scale) {
    tuners_[f] = std::vector<StepTuner>(count, StepTuner(scale));
  };
  std::size_t nt = static_cast<std::size_t>(data_.n) * data_.len;
  make(NodeFamily::alpha, nt, 0.5);
  make(NodeFamily::trend, nt, 0.5);
  make(NodeFamily::trend_mean, 1, 0.2);
  make(NodeFamily::spatial, data_.n, 0.2);
  make(NodeFamily::weekday_onset, static_cast<std::size_t>(data_.n) * 6, 0.2);
  make(NodeFamily::weekday_onset_mean, 6, 0.2);
  make(NodeFamily::weekday_report, static_cast<std::size_t>(data_.n) * 6, 0.2);
  make(NodeFamily::weekday_report_mean, 6, 0.2);
  make(NodeFamily::delay_intercept, data_.dmax, 0.2);
  make(NodeFamily::dispersion, data_.dmax, 0.5);
  make(NodeFamily::hazard, nt * data_.dmax, 0.5);
  make(NodeFamily::trend_ar, 1, 0.3);
  make(NodeFamily::hazard_ar, 1, 0.3);
  make(NodeFamily::latent_total, nt, 1.0);  // scale unused: independence proposal
}

template <class DeltaFn>
void McmcSampler::metropolis(NodeFamily f, std::size_t node, double& value, DeltaFn&& delta) {
  StepTuner& tuner = tuners_[f][node];
  double prop = value + tuner.scale() * rng_.normal();
  double lr = delta(prop);
  bool accept = lr >= 0.0 ||
                (std::isfinite(lr) && std::log(rng_.uniform_open()) < lr);
  if (accept) value = prop;
  tuner.record(accept);
}

template <class DeltaFn, class ToUnconstrained, class ToValue>
void McmcSampler::metropolis_transformed(NodeFamily f, std::size_t node, double& value,
                                         DeltaFn&& delta, ToUnconstrained&& fwd,
                                         ToValue&& back) {
  StepTuner& tuner = tuners_[f][node];
  double prop = back(fwd(value) + tuner.scale() * rng_.normal());
  double lr = delta(prop);  // must include the transform's Jacobian
  bool accept = lr >= 0.0 ||
                (std::isfinite(lr) && std::log(rng_.uniform_open()) < lr);
  if (accept) value = prop;
  tuner.record(accept);
}

void McmcSampler::mh_step(NodeFamily f, std::size_t node, double& value,
                          const std::function<double(double)>& delta) {
  metropolis(f, node, value, delta);
}

void McmcSampler::recenter_spatial() {
  state_.d.array() -= state_.d.mean();
}

void McmcSampler::update_latent_total(int i, int t) {
  if (data_.pinned[t]) return;
  StepTuner& tuner = tuners_[NodeFamily::latent_total][static_cast<std::size_t>(i) * data_.len + t];
  double ll = log_lambda(i, t, state_, data_);
  if (!std::isfinite(ll)) throw NumericError("non-finite rate in latent-total update");
  double lam = std::exp(ll);
  if (!(lam < kMaxRate)) throw NumericError("case-count rate exploded during sampling");
  if (t == data_.len - 1) {
    // The as-of day conditions on nothing: its conditional is the Poisson
    // itself, so draw it exactly.
    state_.y(i, t) = rng_.poisson(lam);
    tuner.record(true);
    return;
  }
  long long s_cond = data_.s_cond[static_cast<std::size_t>(i) * data_.len + t];
  double stick = 1.0;
  for (int dl = 0; dl < data_.n_terms[t]; ++dl)
    stick *= 1.0 - expit(state_.psi_at(i, t, dl));
  double rate = std::max(lam * stick, 1e-8);
  long long r_new = rng_.poisson(rate);
  long long y_new = s_cond + r_new;
  long long y_old = state_.y(i, t);
  if (y_new == y_old) {
    tuner.record(true);
    return;
  }
  long long r_old = y_old - s_cond;
  double lr = node_delta::latent_total(state_, data_, hp_, i, t, y_new) +
              static_cast<double>(r_old - r_new) * std::log(rate) +
              std::lgamma(static_cast<double>(r_new) + 1.0) -
              std::lgamma(static_cast<double>(r_old) + 1.0);
  bool accept = lr >= 0.0 || (std::isfinite(lr) && std::log(rng_.uniform_open()) < lr);
  if (accept) state_.y(i, t) = y_new;
  tuner.record(accept);
}

void McmcSampler::update_variance_components() {
  const int n = data_.n, len = data_.len, dmax = data_.dmax;
  const ModelState& s = state_;

  double ssr = 0.0;
  for (int i = 0; i < n; ++i)
    for (int t = 1; t < len; ++t) {
      double r = s.alpha(i, t) - s.alpha(i, t - 1) - s.delta(i, t - 1);
      ssr += r * r;
    }
  state_.tau2_alpha = rng_.inverse_gamma(hp_.ig_shape + 0.5 * n * (len - 1),
                                         hp_.ig_scale + 0.5 * ssr);

  Eigen::VectorXd c = s.centered_d();
  ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    double level = s.delta_bar + c(i);
    double r = s.delta(i, 0) - level;
    ssr += r * r;
    for (int t = 1; t < len; ++t) {
      r = s.delta(i, t) - level - s.rho_delta * (s.delta(i, t - 1) - level);
      ssr += r * r;
    }
  }
  state_.tau2_delta = rng_.inverse_gamma(hp_.ig_shape + 0.5 * n * len, hp_.ig_scale + 0.5 * ssr);

  ssr = 0.0;
  for (const auto& [a, b] : data_.graph->edges) {
    double r = s.d(a) - s.d(b);
    ssr += r * r;
  }
  state_.tau2_d =
      rng_.inverse_gamma(hp_.ig_shape + 0.5 * (n - 1), hp_.ig_scale + 0.5 * ssr);

  ssr = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k) {
      double r = s.eta(i, k) - s.eta_bar(k);
      ssr += r * r;
    }
  state_.tau2_eta = rng_.inverse_gamma(hp_.ig_shape + 3.0 * n, hp_.ig_scale + 0.5 * ssr);

  ssr = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k) {
      double r = s.xi(i, k) - s.xi_bar(k);
      ssr += r * r;
    }
  state_.tau2_xi = rng_.inverse_gamma(hp_.ig_shape + 3.0 * n, hp_.ig_scale + 0.5 * ssr);

  ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix<double, 6, 1> xi_row = s.xi.row(i).transpose();
    for (int dl = 0; dl < dmax; ++dl) {
      double mu_prev = s.beta(dl) + data_.design.v(0, dl).dot(xi_row);
      double r = s.psi_at(i, 0, dl) - mu_prev;
      ssr += r * r;
      for (int t = 1; t < len; ++t) {
        double mu = s.beta(dl) + data_.design.v(t, dl).dot(xi_row);
        r = s.psi_at(i, t, dl) - mu - s.rho_psi * (s.psi_at(i, t - 1, dl) - mu_prev);
        ssr += r * r;
        mu_prev = mu;
      }
    }
  }
  state_.tau2_psi = rng_.inverse_gamma(hp_.ig_shape + 0.5 * n * len * dmax,
                                       hp_.ig_scale + 0.5 * ssr);
}

void McmcSampler::maybe_adapt(long long iteration, bool adapting) {
  if (!adapting || iteration % cfg_.adapt_interval != 0) return;
  for (auto& [f, vec] : tuners_)
    for (auto& tuner : vec) tuner.adapt(cfg_.target_acceptance);
}

void McmcSampler::freeze_tuners() {
  for (auto& [f, vec] : tuners_)
    for (auto& tuner : vec) {
      tuner.freeze();
      tuner.reset_totals();  // report post-burn-in acceptance only
    }
  frozen_ = true;
}

void McmcSampler::sweep(long long iteration, bool adapting) {
  const int n = data_.n, len = data_.len, dmax = data_.dmax;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t)
      metropolis(NodeFamily::alpha, static_cast<std::size_t>(i) * len + t, state_.alpha(i, t),
                 [&](double v) { return node_delta::alpha(state_, data_, hp_, i, t, v); });
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t)
      metropolis(NodeFamily::trend, static_cast<std::size_t>(i) * len + t, state_.delta(i, t),
                 [&](double v) { return node_delta::trend(state_, data_, i, t, v); });
  metropolis(NodeFamily::trend_mean, 0, state_.delta_bar,
             [&](double v) { return node_delta::trend_mean(state_, data_, hp_, v); });
  for (int i = 0; i < n; ++i)
    metropolis(NodeFamily::spatial, i, state_.d(i),
               [&](double v) { return node_delta::spatial(state_, data_, i, v); });
  recenter_spatial();
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k)
      metropolis(NodeFamily::weekday_onset, static_cast<std::size_t>(i) * 6 + k,
                 state_.eta(i, k), [&](double v) {
                   return node_delta::weekday_onset(state_, data_, hp_, i, k, v);
                 });
  for (int k = 0; k < 6; ++k)
    metropolis(NodeFamily::weekday_onset_mean, k, state_.eta_bar(k),
               [&](double v) { return node_delta::weekday_onset_mean(state_, hp_, k, v); });
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k)
      metropolis(NodeFamily::weekday_report, static_cast<std::size_t>(i) * 6 + k,
                 state_.xi(i, k),
                 [&](double v) { return node_delta::weekday_report(state_, data_, i, k, v); });
  for (int k = 0; k < 6; ++k)
    metropolis(NodeFamily::weekday_report_mean, k, state_.xi_bar(k),
               [&](double v) { return node_delta::weekday_report_mean(state_, hp_, k, v); });
  for (int d = 0; d < dmax; ++d)
    metropolis(NodeFamily::delay_intercept, d, state_.beta(d), [&](double v) {
      return node_delta::delay_intercept(state_, data_, hp_, d, v);
    });
  for (int d = 0; d < dmax; ++d) {
    double cur = state_.phi(d);
    metropolis_transformed(
        NodeFamily::dispersion, d, state_.phi(d),
        [&](double v) {
          if (!(v > 0.0) || !std::isfinite(v)) return kNegInf;
          return node_delta::dispersion(state_, data_, hp_, d, v) + std::log(v) - std::log(cur);
        },
        [](double x) { return std::log(x); }, [](double z) { return std::exp(z); });
  }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t)
      for (int d = 0; d < dmax; ++d)
        metropolis(NodeFamily::hazard,
                   (static_cast<std::size_t>(i) * len + t) * dmax + d,
                   state_.psi_at(i, t, d),
                   [&](double v) { return node_delta::hazard(state_, data_, i, t, d, v); });
  {
    double cur = state_.rho_delta;
    metropolis_transformed(
        NodeFamily::trend_ar, 0, state_.rho_delta,
        [&](double v) {
          return node_delta::trend_ar(state_, data_, v) + std::log1p(-v * v) -
                 std::log1p(-cur * cur);
        },
        [](double r) { return std::log1p(r) - std::log1p(-r); },
        [](double z) { return std::tanh(0.5 * z); });
  }
  {
    double cur = state_.rho_psi;
    metropolis_transformed(
        NodeFamily::hazard_ar, 0, state_.rho_psi,
        [&](double v) {
          return node_delta::hazard_ar(state_, data_, v) + std::log1p(-v * v) -
                 std::log1p(-cur * cur);
        },
        [](double r) { return std::log1p(r) - std::log1p(-r); },
        [](double z) { return std::tanh(0.5 * z); });
  }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t) update_latent_total(i, t);
  update_variance_components();
  maybe_adapt(iteration, adapting);
}

ChainDraws McmcSampler::run() {
  cfg_.validate();
  if (!std::isfinite(log_joint(state_, data_, hp_)))
    throw NumericError("joint density is not finite at the initial state");
  long long kept = cfg_.retained_draws();
  ChainDraws out;
  out.values.resize(kept, monitor_columns(data_, cfg_).size());
  long long at = 0;
  for (long long it = 1; it <= cfg_.iterations; ++it) {
    bool adapting = it <= cfg_.burn_in;
    if (!adapting && !frozen_) freeze_tuners();
    sweep(it, adapting);
    if (it > cfg_.burn_in && (it - cfg_.burn_in) % cfg_.thin == 0 && at < kept)
      out.values.row(at++) = monitor_values(state_, data_, cfg_).transpose();
  }
  return out;
}

std::map<std::string, double> McmcSampler::acceptance_rates() const {
  std::map<std::string, double> rates;
  for (const auto& [f, vec] : tuners_) {
    long long att = 0, acc = 0;
    for (const auto& tuner : vec) {
      att += tuner.attempts();
      acc += tuner.accepts();
    }
    if (att > 0) rates[family_name(f)] = static_cast<double>(acc) / att;
  }
  return rates;
}

std::vector<double> McmcSampler::tuner_scales(NodeFamily f) const {
  std::vector<double> out;
  for (const auto& tuner : tuners_.at(f)) out.push_back(tuner.scale());
  return out;
}

ChainDraws run_chain(const ModelData& data, const HyperPriorSpec& hp, const SamplerConfig& cfg,
                     int chain_index) {
  McmcSampler sampler(data, hp, cfg, chain_index);
  return sampler.run();
}

SamplerRun run_chains(const ModelData& data, const HyperPriorSpec& hp,
                      const SamplerConfig& cfg) {
  cfg.validate();
  SamplerRun out;
  out.draws.columns = monitor_columns(data, cfg);
  out.draws.chains.resize(cfg.chains);
  std::vector<std::map<std::string, double>> rates(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);

  auto work = [&](int chain) {
    try {
      McmcSampler sampler(data, hp, cfg, chain);
      out.draws.chains[chain] = sampler.run();
      rates[chain] = sampler.acceptance_rates();
    } catch (...) {
      errors[chain] = std::current_exception();
    }
  };

  if (cfg.threads <= 1 || cfg.chains == 1) {
    for (int chain = 0; chain < cfg.chains; ++chain) work(chain);
  } else {
    for (int start = 0; start < cfg.chains; start += cfg.threads) {
      std::vector<std::thread> pool;
      for (int chain = start; chain < std::min(cfg.chains, start + cfg.threads); ++chain)
        pool.emplace_back(work, chain);
      for (auto& th : pool) th.join();
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  for (const auto& chain_rates : rates)
    for (const auto& [name, rate] : chain_rates) out.acceptance_rates[name] += rate / cfg.chains;
  return out;
}

}  // namespace nowcast
