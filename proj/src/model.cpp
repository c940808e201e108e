#include "model.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace nowcast {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

ModelState ModelState::zeros(int n, int len, int dmax) {
  ModelState s;
  s.alpha = Eigen::MatrixXd::Zero(n, len);
  s.delta = Eigen::MatrixXd::Zero(n, len);
  s.d = Eigen::VectorXd::Zero(n);
  s.eta = Eigen::MatrixXd::Zero(n, 6);
  s.eta_bar = Eigen::VectorXd::Zero(6);
  s.psi.assign(static_cast<std::size_t>(n) * len * dmax, 0.0);
  s.beta = Eigen::VectorXd::Zero(dmax);
  s.xi = Eigen::MatrixXd::Zero(n, 6);
  s.xi_bar = Eigen::VectorXd::Zero(6);
  s.phi = Eigen::VectorXd::Ones(dmax);
  s.y = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, len);
  return s;
}

double& ModelState::psi_at(int i, int t, int d_idx) {
  int len = static_cast<int>(alpha.cols());
  int dmax = static_cast<int>(beta.size());
  return psi[(static_cast<std::size_t>(i) * len + t) * dmax + d_idx];
}

double ModelState::psi_at(int i, int t, int d_idx) const {
  int len = static_cast<int>(alpha.cols());
  int dmax = static_cast<int>(beta.size());
  return psi[(static_cast<std::size_t>(i) * len + t) * dmax + d_idx];
}

Eigen::VectorXd ModelState::centered_d() const {
  return d.array() - d.mean();
}

ModelData::ModelData(const ReportingTriangle& tri, const CountyGraph& g)
    : n(tri.n_counties()),
      len(tri.length()),
      dmax(tri.max_delay()),
      graph(&g),
      design(tri.window()),
      window(tri.window()) {
  if (g.size() != n) throw InputError("county graph and triangle disagree on county count");
  z.assign(static_cast<std::size_t>(n) * len * (dmax + 1), 0);
  s_cond.assign(static_cast<std::size_t>(n) * len, 0);
  y_full.assign(static_cast<std::size_t>(n) * len, 0);
  n_terms.assign(len, 0);
  pinned.assign(len, 0);
  for (int t = 0; t < len; ++t) {
    pinned[t] = t + dmax <= len - 1;
    // The as-of day is forced missing; elsewhere one factor per observed
    // delay cell, except the last delay of a complete row, which is the
    // deterministic remainder.
    n_terms[t] = t == len - 1 ? 0 : std::min(dmax, len - t);
  }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t) {
      long long full = 0;
      for (int d = 0; d <= dmax; ++d) {
        long long c = tri.count(i, t, d);
        z[(static_cast<std::size_t>(i) * len + t) * (dmax + 1) + d] = c;
        full += c;
      }
      y_full[static_cast<std::size_t>(i) * len + t] = full;
      long long cond = 0;
      if (pinned[t]) {
        cond = full;
      } else {
        for (int d = 0; d < n_terms[t]; ++d) cond += z_at(i, t, d);
      }
      s_cond[static_cast<std::size_t>(i) * len + t] = cond;
    }
}

long long ModelData::prefix(int i, int t, int d) const {
  long long s = 0;
  for (int j = 0; j < d; ++j) s += z_at(i, t, j);
  return s;
}

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_beta_binomial(long long k, long long n, double a, double b) {
  if (k < 0 || k > n) return kNegInf;
  if (!(a > 0.0) || !(b > 0.0)) return kNegInf;
  double lchoose = std::lgamma(static_cast<double>(n) + 1.0) -
                   std::lgamma(static_cast<double>(k) + 1.0) -
                   std::lgamma(static_cast<double>(n - k) + 1.0);
  return lchoose + log_beta_fn(static_cast<double>(k) + a, static_cast<double>(n - k) + b) -
         log_beta_fn(a, b);
}

std::vector<double> stick_breaking_mean(const std::vector<double>& nu) {
  std::vector<double> p(nu.size() + 1, 0.0);
  double stick = 1.0;
  for (std::size_t d = 0; d < nu.size(); ++d) {
    p[d] = nu[d] * stick;
    stick *= 1.0 - nu[d];
  }
  p[nu.size()] = stick;
  return p;
}

double log_normal_density(double x, double mean, double var) {
  double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * r * r / var;
}

double log_inverse_gamma_density(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double log_gamma_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_lambda(int i, int t, const ModelState& s, const ModelData& data) {
  return data.graph->offset[i] + s.alpha(i, t) + data.design.dot_x(t, s.eta.row(i).transpose());
}

double log_poisson_outcome(int i, int t, const ModelState& s, const ModelData& data,
                           const HyperPriorSpec& hp) {
  double ll = log_lambda(i, t, s, data);
  if (!(std::abs(ll) < hp.log_lambda_guard)) return kNegInf;
  double yv = static_cast<double>(s.y(i, t));
  return yv * ll - std::exp(ll) - std::lgamma(yv + 1.0);
}

double log_latent_prior(int i, const ModelState& s, const ModelData& data,
                        const HyperPriorSpec& hp) {
  double sum = log_normal_density(s.alpha(i, 0), 0.0, hp.alpha1_var);
  for (int t = 1; t < data.len; ++t)
    sum += log_normal_density(s.alpha(i, t), s.alpha(i, t - 1) + s.delta(i, t - 1),
                              s.tau2_alpha);
  return sum;
}

double log_trend_prior(int i, const ModelState& s, const ModelData& data) {
  Eigen::VectorXd c = s.centered_d();
  double level = s.delta_bar + c(i);
  double sum = log_normal_density(s.delta(i, 0), level, s.tau2_delta);
  for (int t = 1; t < data.len; ++t)
    sum += log_normal_density(s.delta(i, t), level + s.rho_delta * (s.delta(i, t - 1) - level),
                              s.tau2_delta);
  return sum;
}

double log_icar_prior(const Eigen::VectorXd& d, const CountyGraph& graph, double tau2_d) {
  double ssq = 0.0;
  for (const auto& [i, j] : graph.edges) {
    double diff = d(i) - d(j);
    ssq += diff * diff;
  }
  return -0.5 * ssq / tau2_d;
}

double log_delay_likelihood(int i, int t, const ModelState& s, const ModelData& data) {
  double sum = 0.0;
  long long remaining = s.y(i, t);
  for (int d = 0; d < data.n_terms[t]; ++d) {
    if (remaining < 0) return kNegInf;
    double nu = expit(s.psi_at(i, t, d));
    double a = nu * s.phi(d);
    double b = (1.0 - nu) * s.phi(d);
    long long zc = data.z_at(i, t, d);
    sum += log_beta_binomial(zc, remaining, a, b);
    remaining -= zc;
  }
  return sum;
}

double log_psi_prior(int i, const ModelState& s, const ModelData& data) {
  double sum = 0.0;
  for (int d = 0; d < data.dmax; ++d) {
    double mu_prev = s.beta(d) + data.design.dot_v(0, d, s.xi.row(i).transpose());
    sum += log_normal_density(s.psi_at(i, 0, d), mu_prev, s.tau2_psi);
    for (int t = 1; t < data.len; ++t) {
      double mu = s.beta(d) + data.design.dot_v(t, d, s.xi.row(i).transpose());
      double mean = mu + s.rho_psi * (s.psi_at(i, t - 1, d) - mu_prev);
      sum += log_normal_density(s.psi_at(i, t, d), mean, s.tau2_psi);
      mu_prev = mu;
    }
  }
  return sum;
}

double log_hierarchical_effects(const ModelState& s, const HyperPriorSpec& hp) {
  double sum = 0.0;
  int n = static_cast<int>(s.eta.rows());
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k) {
      sum += log_normal_density(s.eta(i, k), s.eta_bar(k), s.tau2_eta);
      sum += log_normal_density(s.xi(i, k), s.xi_bar(k), s.tau2_xi);
    }
  for (int k = 0; k < 6; ++k) {
    sum += log_normal_density(s.eta_bar(k), 0.0, hp.effect_var);
    sum += log_normal_density(s.xi_bar(k), 0.0, hp.effect_var);
  }
  sum += log_normal_density(s.delta_bar, 0.0, hp.effect_var);
  return sum;
}

double log_hyper_priors(const ModelState& s, const ModelData& data, const HyperPriorSpec& hp) {
  double sum = 0.0;
  for (double t2 : {s.tau2_alpha, s.tau2_delta, s.tau2_d, s.tau2_eta, s.tau2_psi, s.tau2_xi})
    sum += log_inverse_gamma_density(t2, hp.ig_shape, hp.ig_scale);
  for (int d = 0; d < data.dmax; ++d) {
    sum += log_normal_density(s.beta(d), 0.0, hp.beta_var);
    sum += log_gamma_density(s.phi(d), hp.phi_shape, hp.phi_rate);
  }
  if (!(std::abs(s.rho_delta) < 1.0) || !(std::abs(s.rho_psi) < 1.0)) return kNegInf;
  sum += 2.0 * -std::log(2.0);  // uniform(-1,1) on both AR coefficients
  // Normalization of the intrinsic spatial prior on its sum-to-zero subspace.
  sum += -0.5 * (data.n - 1) * (kLog2Pi + std::log(s.tau2_d));
  return sum;
}

double log_joint(const ModelState& s, const ModelData& data, const HyperPriorSpec& hp) {
  double sum = 0.0;
  for (int i = 0; i < data.n; ++i) {
    for (int t = 0; t < data.len; ++t) {
      sum += log_poisson_outcome(i, t, s, data, hp);
      sum += log_delay_likelihood(i, t, s, data);
    }
    sum += log_latent_prior(i, s, data, hp);
    sum += log_trend_prior(i, s, data);
    sum += log_psi_prior(i, s, data);
  }
  sum += log_icar_prior(s.centered_d(), *data.graph, s.tau2_d);
  sum += log_hierarchical_effects(s, hp);
  sum += log_hyper_priors(s, data, hp);
  return sum;
}

}  // namespace nowcast
