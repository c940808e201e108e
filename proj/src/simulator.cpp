#include "simulator.hpp"

#include <cmath>
#include <fstream>

#include "csv.hpp"
#include "design.hpp"
#include "errors.hpp"

namespace nowcast {

namespace {
// One-shot draw of every parameter (no counts).
void draw_params(const CountyGraph& g, const AnalysisWindow& w, const HyperPriorSpec& hp,
                 const SimOverrides& o, Rng& rng, const WeekdayDesign& design, ModelState& s) {
  const int n = g.size(), len = w.length, dmax = w.max_delay;
  s = ModelState::zeros(n, len, dmax);

  auto var_draw = [&](const std::optional<double>& fixed) {
    return fixed ? *fixed : rng.inverse_gamma(hp.ig_shape, hp.ig_scale);
  };
  s.tau2_alpha = var_draw(o.tau2_alpha);
  s.tau2_delta = var_draw(o.tau2_delta);
  s.tau2_d = var_draw(o.tau2_d);
  s.tau2_eta = var_draw(o.tau2_eta);
  s.tau2_psi = var_draw(o.tau2_psi);
  s.tau2_xi = var_draw(o.tau2_xi);
  s.rho_delta = o.rho_delta ? *o.rho_delta : 2.0 * rng.uniform() - 1.0;
  s.rho_psi = o.rho_psi ? *o.rho_psi : 2.0 * rng.uniform() - 1.0;
  s.delta_bar = o.delta_bar ? *o.delta_bar : std::sqrt(hp.effect_var) * rng.normal();

  for (int k = 0; k < 6; ++k) {
    s.eta_bar(k) = std::sqrt(hp.effect_var) * rng.normal();
    s.xi_bar(k) = std::sqrt(hp.effect_var) * rng.normal();
  }
  for (int d = 0; d < dmax; ++d) {
    s.beta(d) = o.beta ? o.beta->at(d) : std::sqrt(hp.beta_var) * rng.normal();
    s.phi(d) = o.phi ? o.phi->at(d) : rng.gamma(hp.phi_shape, hp.phi_rate);
  }
  if (o.fixed_d) {
    if (static_cast<int>(o.fixed_d->size()) != n)
      throw InputError("fixed spatial offsets must list one value per county");
    for (int i = 0; i < n; ++i) s.d(i) = o.fixed_d->at(i);
  } else {
    s.d = draw_spatial_offsets(g, s.tau2_d, rng);
  }
  s.d.array() -= s.d.mean();

  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k) {
      s.eta(i, k) = s.eta_bar(k) + std::sqrt(s.tau2_eta) * rng.normal();
      s.xi(i, k) = s.xi_bar(k) + std::sqrt(s.tau2_xi) * rng.normal();
    }

  for (int i = 0; i < n; ++i) {
    double level = s.delta_bar + s.d(i);
    s.delta(i, 0) = level + std::sqrt(s.tau2_delta) * rng.normal();
    for (int t = 1; t < len; ++t)
      s.delta(i, t) = level + s.rho_delta * (s.delta(i, t - 1) - level) +
                      std::sqrt(s.tau2_delta) * rng.normal();
    s.alpha(i, 0) =
        o.alpha0 ? *o.alpha0 : std::sqrt(hp.alpha1_var) * rng.normal();
    for (int t = 1; t < len; ++t)
      s.alpha(i, t) =
          s.alpha(i, t - 1) + s.delta(i, t - 1) + std::sqrt(s.tau2_alpha) * rng.normal();
  }

  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xi_row = s.xi.row(i).transpose();
    for (int d = 0; d < dmax; ++d) {
      double mu_prev = s.beta(d) + design.dot_v(0, d, xi_row);
      s.psi_at(i, 0, d) = mu_prev + std::sqrt(s.tau2_psi) * rng.normal();
      for (int t = 1; t < len; ++t) {
        double mu = s.beta(d) + design.dot_v(t, d, xi_row);
        s.psi_at(i, t, d) = mu + s.rho_psi * (s.psi_at(i, t - 1, d) - mu_prev) +
                            std::sqrt(s.tau2_psi) * rng.normal();
        mu_prev = mu;
      }
    }
  }

}
}  // namespace

bool redraw_counts(Simulation& sim, const CountyGraph& g, const AnalysisWindow& w,
                   const HyperPriorSpec& hp, Rng& rng, std::optional<long long> max_total) {
  const int n = g.size(), len = w.length, dmax = w.max_delay;
  WeekdayDesign design(w);
  ModelState& s = sim.state;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd eta_row = s.eta.row(i).transpose();
    for (int t = 0; t < len; ++t) {
      double ll = g.offset[i] + s.alpha(i, t) + design.dot_x(t, eta_row);
      if (!(std::abs(ll) < hp.log_lambda_guard)) return false;
      double lam = std::exp(ll);
      if (!(lam < 1e12))
        throw NumericError("simulated rate exploded; fix the level or variances");
      s.y(i, t) = rng.poisson(lam);
    }
  }
  // Both checks run before the per-case materialization below: a replication
  // headed for rejection (or for exhausting memory on the line list) must not
  // get that far.
  if (max_total && s.y.sum() > *max_total) return false;
  if (s.y.sum() > 10000000)
    throw NumericError(
        "simulated epidemic exceeds 10M cases; cap it with a total-count limit "
        "or tighten the priors");

  sim.p.assign(static_cast<std::size_t>(n) * len * (dmax + 1), 0.0);
  sim.z.assign(static_cast<std::size_t>(n) * len * (dmax + 1), 0);
  sim.records.clear();
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t) {
      std::vector<double> p(dmax + 1, 0.0);
      double stick = 1.0;
      for (int d = 0; d < dmax; ++d) {
        double nu = expit(s.psi_at(i, t, d));
        double frac = rng.beta(nu * s.phi(d), (1.0 - nu) * s.phi(d));
        p[d] = frac * stick;
        stick *= 1.0 - frac;
      }
      p[dmax] = stick;
      std::vector<std::int64_t> row = rng.multinomial(s.y(i, t), p);
      Date onset = w.date_of_day(t);
      for (int d = 0; d <= dmax; ++d) {
        std::size_t at = (static_cast<std::size_t>(i) * len + t) * (dmax + 1) + d;
        sim.p[at] = p[d];
        sim.z[at] = row[d];
        for (long long k = 0; k < row[d]; ++k)
          sim.records.push_back({g.county_ids[i], onset, add_days(onset, d)});
      }
    }
  return true;
}

Eigen::VectorXd draw_spatial_offsets(const CountyGraph& g, double tau2_d, Rng& rng) {
  const int n = g.size();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) lap(i, i) = g.degree[i];
  for (const auto& [i, j] : g.edges) {
    lap(i, j) -= 1.0;
    lap(j, i) -= 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  if (eig.info() != Eigen::Success) throw NumericError("Laplacian eigendecomposition failed");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    double ev = eig.eigenvalues()(k);
    if (ev < 1e-9) continue;  // null space: the constant vector(s)
    d += eig.eigenvectors().col(k) * (std::sqrt(tau2_d / ev) * rng.normal());
  }
  d.array() -= d.mean();
  return d;
}

Simulation simulate(const CountyGraph& g, const AnalysisWindow& w, const HyperPriorSpec& hp,
                    const SimOverrides& o, Rng& rng) {
  w.validate_core();
  WeekdayDesign design(w);
  Simulation sim;
  constexpr int kMaxRedraws = 100000;
  for (int attempt = 0;; ++attempt) {
    if (attempt > kMaxRedraws)
      throw NumericError("could not draw an in-guard replication; priors too heavy-tailed");
    draw_params(g, w, hp, o, rng, design, sim.state);
    if (!redraw_counts(sim, g, w, hp, rng, o.max_total)) {
      ++sim.redraws;
      continue;
    }
    break;
  }
  return sim;
}

std::vector<LineListRecord> censor(const std::vector<LineListRecord>& records, Date as_of) {
  std::vector<LineListRecord> out;
  for (const auto& r : records)
    if (r.report <= as_of) out.push_back(r);
  return out;
}

void write_truth_csv(const std::string& path, const CountyGraph& g, const AnalysisWindow& w,
                     const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& y) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "county_id,onset_date,count\n";
  for (int i = 0; i < y.rows(); ++i)
    for (int t = 0; t < y.cols(); ++t)
      out << g.county_ids[i] << ',' << format_date(w.date_of_day(t)) << ',' << y(i, t) << '\n';
}

Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> load_truth_csv(
    const std::string& path, const CountyIndex& counties, const AnalysisWindow& w) {
  CsvTable table = read_csv_file(path);
  require_header(table, {"county_id", "onset_date", "count"}, path);
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> y =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Constant(counties.size(),
                                                                         w.length, -1);
  for (const auto& row : table.rows) {
    int i = counties.require_index(row[0]);
    int t = w.day_of_date(parse_date(row[1]));
    if (t < 0 || t >= w.length) continue;
    y(i, t) = parse_int(row[2], "true count");
  }
  for (int i = 0; i < y.rows(); ++i)
    for (int t = 0; t < y.cols(); ++t)
      if (y(i, t) < 0)
        throw InputError("truth file is missing county " + counties.ids[i] + " on " +
                         format_date(w.date_of_day(t)));
  return y;
}

}  // namespace nowcast
