#pragma once

#include <Eigen/Dense>
#include <vector>

#include "design.hpp"
#include "graph.hpp"
#include "triangle.hpp"

namespace nowcast {

// Fixed prior constants. Defaults follow the production analysis; the
// reduced-model calibration tests swap in lighter-tailed values (every field
// is recorded in the run config either way).
struct HyperPriorSpec {
  double effect_var = 1.0;    // state-level weekday effects and the shared trend mean
  double beta_var = 4.0;      // delay intercepts
  double alpha1_var = 100.0;  // initial log-rate level
  double ig_shape = 0.5;      // inverse-gamma on every variance component
  double ig_scale = 0.5;
  double phi_shape = 1.0;     // gamma prior on the beta-binomial dispersions
  double phi_rate = 0.01;
  double log_lambda_guard = 50.0;  // |log rate| at or beyond this is a divergent state
};

// One full assignment of the latent variables and hyperparameters.
// Day indices are 0-based (day len-1 = as-of date); delta/alpha recursions
// start at t=0. psi holds the logit reporting hazards for delays 0..dmax-1;
// the final delay proportion is the stick-breaking remainder.
struct ModelState {
  Eigen::MatrixXd alpha;          // N x T latent log-rate level
  Eigen::MatrixXd delta;          // N x T local trend
  double delta_bar = 0.0;         // shared trend mean
  Eigen::VectorXd d;              // N spatial trend offsets (kept centered)
  Eigen::MatrixXd eta;            // N x 6 county weekday effects (onset)
  Eigen::VectorXd eta_bar;        // 6 state weekday effects
  std::vector<double> psi;        // N*T*D logit hazards
  Eigen::VectorXd beta;           // D delay intercepts
  Eigen::MatrixXd xi;             // N x 6 county weekday effects (report)
  Eigen::VectorXd xi_bar;         // 6
  double rho_delta = 0.0;         // trend AR coefficient, (-1,1)
  double rho_psi = 0.0;           // hazard AR coefficient, (-1,1)
  Eigen::VectorXd phi;            // D beta-binomial dispersions, > 0
  double tau2_alpha = 1.0, tau2_delta = 1.0, tau2_d = 1.0;
  double tau2_eta = 1.0, tau2_psi = 1.0, tau2_xi = 1.0;
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> y;  // N x T true totals

  static ModelState zeros(int n, int len, int dmax);

  double& psi_at(int i, int t, int d_idx);
  double psi_at(int i, int t, int d_idx) const;

  // d with its mean removed; all densities are functions of this centered
  // version, so the periodic recentering sweep never changes any of them.
  Eigen::VectorXd centered_d() const;
};

// Immutable view of one analysis problem: the censored counts plus the
// bookkeeping the densities need. The as-of day itself is treated as missing
// (same-day reports are discarded), so its conditioned total is zero and its
// true count is a pure forecast.
struct ModelData {
  int n = 0, len = 0, dmax = 0;
  const CountyGraph* graph = nullptr;
  WeekdayDesign design;
  AnalysisWindow window;
  std::vector<long long> z;        // N x T x (D+1), censored cells zero
  std::vector<long long> s_cond;   // N x T totals the model conditions on
  std::vector<long long> y_full;   // N x T full-row sums (valid where pinned)
  std::vector<int> n_terms;        // per day: number of beta-binomial factors
  std::vector<char> pinned;        // per day: true count fully observed

  ModelData(const ReportingTriangle& tri, const CountyGraph& g);

  long long z_at(int i, int t, int d) const {
    return z[(static_cast<std::size_t>(i) * len + t) * (dmax + 1) + d];
  }
  // Count still unreported before delay d: sum of z over delays < d.
  long long prefix(int i, int t, int d) const;
  bool y_free(int, int t) const { return !pinned[t]; }
};

double expit(double x);
double log_beta_fn(double a, double b);
// log P(k | n, a, b) for the beta-binomial; -inf outside the support.
double log_beta_binomial(long long k, long long n, double a, double b);

// p_0..p_D implied by hazards nu (length D): p_d = nu_d * prod_{j<d}(1-nu_j),
// with p_D the remainder. Sums to one by construction.
std::vector<double> stick_breaking_mean(const std::vector<double>& nu);

// Per-block log densities. Each returns -inf for divergent states rather
// than throwing, so Metropolis steps can simply reject.
double log_lambda(int i, int t, const ModelState& s, const ModelData& data);
double log_poisson_outcome(int i, int t, const ModelState& s, const ModelData& data,
                           const HyperPriorSpec& hp);
double log_latent_prior(int i, const ModelState& s, const ModelData& data,
                        const HyperPriorSpec& hp);
double log_trend_prior(int i, const ModelState& s, const ModelData& data);
double log_icar_prior(const Eigen::VectorXd& d, const CountyGraph& graph, double tau2_d);
double log_delay_likelihood(int i, int t, const ModelState& s, const ModelData& data);
double log_psi_prior(int i, const ModelState& s, const ModelData& data);
double log_hierarchical_effects(const ModelState& s, const HyperPriorSpec& hp);
double log_hyper_priors(const ModelState& s, const ModelData& data, const HyperPriorSpec& hp);

// Sum of every block above; used in ratios and for diagnostics only.
double log_joint(const ModelState& s, const ModelData& data, const HyperPriorSpec& hp);

double log_normal_density(double x, double mean, double var);
double log_inverse_gamma_density(double x, double shape, double scale);
double log_gamma_density(double x, double shape, double rate);

}  // namespace nowcast
