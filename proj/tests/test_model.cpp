#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "model.hpp"

using namespace nowcast;
using namespace nowcast::testutil;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- independent density evaluator -----------------------------------------
// A from-scratch reimplementation of the same generative story, structured
// as straight loops over the definitions rather than the production blocks.
// Shares nothing with the implementation under test except the state layout.

double ref_lognormal(double x, double mean, double var) {
  const double pi = 3.14159265358979323846;
  double r = x - mean;
  return -r * r / (2.0 * var) - 0.5 * std::log(2.0 * pi * var);
}

double ref_lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double ref_bb(long long k, long long n, double a, double b) {
  if (k < 0 || k > n || !(a > 0) || !(b > 0)) return -kInf;
  double lch = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return lch + ref_lbeta(k + a, n - k + b) - ref_lbeta(a, b);
}

// Weekday coding straight from the calendar: effect coding with Sunday as
// the reference level.
void ref_weekday(Date day, double* x6) {
  int wd = iso_weekday(day);
  for (int k = 0; k < 6; ++k) x6[k] = wd == 7 ? -1.0 : (wd == k + 1 ? 1.0 : 0.0);
}

double ref_log_joint(const ModelState& s, const ModelData& data, const HyperPriorSpec& hp) {
  const int n = data.n, len = data.len, dmax = data.dmax;
  const CountyGraph& g = *data.graph;
  double total = 0.0;

  // centered spatial offsets
  std::vector<double> c(n);
  double dbar = 0.0;
  for (int i = 0; i < n; ++i) dbar += s.d(i);
  dbar /= n;
  for (int i = 0; i < n; ++i) c[i] = s.d(i) - dbar;

  // outcome counts and delay splits
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t) {
      double x6[6];
      ref_weekday(data.window.date_of_day(t), x6);
      double ll = std::log(static_cast<double>(g.population[i])) + s.alpha(i, t);
      for (int k = 0; k < 6; ++k) ll += x6[k] * s.eta(i, k);
      if (std::abs(ll) >= hp.log_lambda_guard) return -kInf;
      double y = static_cast<double>(s.y(i, t));
      total += y * ll - std::exp(ll) - std::lgamma(y + 1.0);

      int terms = t == len - 1 ? 0 : std::min(dmax, len - t);
      long long rem = s.y(i, t);
      for (int d = 0; d < terms; ++d) {
        double nu = 1.0 / (1.0 + std::exp(-s.psi_at(i, t, d)));
        total += ref_bb(data.z_at(i, t, d), rem, nu * s.phi(d), (1.0 - nu) * s.phi(d));
        rem -= data.z_at(i, t, d);
      }
    }

  // latent level and trend walks
  for (int i = 0; i < n; ++i) {
    total += ref_lognormal(s.alpha(i, 0), 0.0, hp.alpha1_var);
    for (int t = 1; t < len; ++t)
      total += ref_lognormal(s.alpha(i, t), s.alpha(i, t - 1) + s.delta(i, t - 1), s.tau2_alpha);
    double level = s.delta_bar + c[i];
    total += ref_lognormal(s.delta(i, 0), level, s.tau2_delta);
    for (int t = 1; t < len; ++t)
      total += ref_lognormal(s.delta(i, t), level + s.rho_delta * (s.delta(i, t - 1) - level),
                             s.tau2_delta);
  }

  // logit hazards around their weekday-adjusted means
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dmax; ++d)
      for (int t = 0; t < len; ++t) {
        double v6[6];
        ref_weekday(data.window.date_of_day(t + d), v6);  // report-day coding
        double mu = s.beta(d);
        for (int k = 0; k < 6; ++k) mu += v6[k] * s.xi(i, k);
        if (t == 0) {
          total += ref_lognormal(s.psi_at(i, 0, d), mu, s.tau2_psi);
        } else {
          double p6[6];
          ref_weekday(data.window.date_of_day(t - 1 + d), p6);
          double mu_prev = s.beta(d);
          for (int k = 0; k < 6; ++k) mu_prev += p6[k] * s.xi(i, k);
          total += ref_lognormal(s.psi_at(i, t, d),
                                 mu + s.rho_psi * (s.psi_at(i, t - 1, d) - mu_prev), s.tau2_psi);
        }
      }

  // pairwise spatial differences plus the sum-to-zero normalization
  const double pi = 3.14159265358979323846;
  for (const auto& [i, j] : g.edges) {
    double diff = c[i] - c[j];
    total += -diff * diff / (2.0 * s.tau2_d);
  }
  total += -0.5 * (n - 1) * std::log(2.0 * pi * s.tau2_d);

  // weekday effect hierarchy
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k)
      total += ref_lognormal(s.eta(i, k), s.eta_bar(k), s.tau2_eta) +
               ref_lognormal(s.xi(i, k), s.xi_bar(k), s.tau2_xi);
  for (int k = 0; k < 6; ++k)
    total += ref_lognormal(s.eta_bar(k), 0.0, hp.effect_var) +
             ref_lognormal(s.xi_bar(k), 0.0, hp.effect_var);
  total += ref_lognormal(s.delta_bar, 0.0, hp.effect_var);

  // hyperpriors
  for (double t2 : {s.tau2_alpha, s.tau2_delta, s.tau2_d, s.tau2_eta, s.tau2_psi, s.tau2_xi})
    total += hp.ig_shape * std::log(hp.ig_scale) - std::lgamma(hp.ig_shape) -
             (hp.ig_shape + 1.0) * std::log(t2) - hp.ig_scale / t2;
  for (int d = 0; d < dmax; ++d) {
    total += ref_lognormal(s.beta(d), 0.0, hp.beta_var);
    total += hp.phi_shape * std::log(hp.phi_rate) - std::lgamma(hp.phi_shape) +
             (hp.phi_shape - 1.0) * std::log(s.phi(d)) - hp.phi_rate * s.phi(d);
  }
  if (std::abs(s.rho_delta) >= 1.0 || std::abs(s.rho_psi) >= 1.0) return -kInf;
  total += 2.0 * std::log(0.5);
  return total;
}
// -----------------------------------------------------------------------------
}  // namespace

TEST_CASE("unit-rate count density at zero is exactly -1") {
  // population 1 makes the offset vanish; zero level gives rate one
  CountyGraph g = make_graph({{"a", 1}, {"b", 1}}, {{"a", "b"}});
  AnalysisWindow w = test_window(4, 2);
  ReportingTriangle tri(w, 2);
  ModelData data(tri, g);
  ModelState s = ModelState::zeros(2, 4, 2);
  HyperPriorSpec hp;
  CHECK(log_poisson_outcome(0, 0, s, data, hp) == doctest::Approx(-1.0).epsilon(1e-14));
  // and the rate guard turns divergent levels into a rejected state
  s.alpha(0, 0) = hp.log_lambda_guard + 1.0;
  CHECK(log_poisson_outcome(0, 0, s, data, hp) == -kInf);
  CHECK(log_joint(s, data, hp) == -kInf);
}

TEST_CASE("flat split density puts probability 1/3 on each of 0,1,2") {
  // unit dispersion pair (a=b=1) over n=2 trials is uniform on {0,1,2}
  for (long long k = 0; k <= 2; ++k)
    CHECK(std::exp(log_beta_binomial(k, 2, 1.0, 1.0)) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(log_beta_binomial(3, 2, 1.0, 1.0) == -kInf);
  CHECK(log_beta_binomial(-1, 2, 1.0, 1.0) == -kInf);
  CHECK(log_beta_binomial(1, 2, 0.0, 1.0) == -kInf);
}

TEST_CASE("split densities sum to one over their support") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int rep = 0; rep < 30; ++rep) {
    long long n = 1 + static_cast<long long>(rng() % 50);
    double phi = 0.2 + 30.0 * u(rng);
    double nu = u(rng);
    double sum = 0.0;
    for (long long k = 0; k <= n; ++k)
      sum += std::exp(log_beta_binomial(k, n, nu * phi, (1.0 - nu) * phi));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("stick-breaking fractions produce the advertised delay split") {
  auto p = stick_breaking_mean({0.5, 0.5});
  REQUIRE(p.size() == 3);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.25).epsilon(1e-12));
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> nu(1 + rng() % 12);
    for (auto& v : nu) v = u(rng);
    auto q = stick_breaking_mean(nu);
    double sum = 0.0;
    for (double v : q) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pairwise spatial density on a two-county pair") {
  CountyGraph g = make_graph({{"a", 100}, {"b", 100}}, {{"a", "b"}});
  Eigen::VectorXd d(2);
  for (double a : {0.1, 0.5, 2.0})
    for (double tau2 : {0.3, 1.0, 4.0}) {
      d << a, -a;
      CHECK(log_icar_prior(d, g, tau2) == doctest::Approx(-2.0 * a * a / tau2).epsilon(1e-13));
    }
}

TEST_CASE("scalar densities match closed forms") {
  // normal at its mean
  CHECK(log_normal_density(3.0, 3.0, 2.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * 3.14159265358979323846 * 2.0)).epsilon(1e-14));
  // gamma with shape 1 is exponential
  CHECK(log_gamma_density(2.0, 1.0, 0.7) == doctest::Approx(std::log(0.7) - 1.4).epsilon(1e-13));
  // inverse gamma = gamma of the reciprocal with the Jacobian
  for (double x : {0.2, 1.0, 5.0})
    CHECK(log_inverse_gamma_density(x, 2.5, 1.7) ==
          doctest::Approx(log_gamma_density(1.0 / x, 2.5, 1.7) - 2.0 * std::log(x))
              .epsilon(1e-12));
  CHECK(log_gamma_density(-1.0, 2.0, 1.0) == -kInf);
  CHECK(log_inverse_gamma_density(0.0, 2.0, 1.0) == -kInf);
}

TEST_CASE("bookkeeping of observable cells, conditioning totals, pinned days") {
  std::mt19937 rng(5);
  auto prob = random_problem(rng, 2, 6, 2);
  const ModelData& data = prob->data;
  CHECK(data.n_terms == std::vector<int>{2, 2, 2, 2, 2, 0});
  CHECK(data.pinned == std::vector<char>{1, 1, 1, 1, 0, 0});
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 6; ++t) {
      long long full = 0, cond = 0;
      for (int d = 0; d <= 2; ++d) {
        if (t + d > 5) CHECK(data.z_at(i, t, d) == 0);
        full += data.z_at(i, t, d);
      }
      for (int d = 0; d < data.n_terms[t]; ++d) cond += data.z_at(i, t, d);
      if (data.pinned[t]) cond = full;
      CHECK(data.y_full[i * 6 + t] == full);
      CHECK(data.s_cond[i * 6 + t] == cond);
      CHECK(data.prefix(i, t, 2) == data.z_at(i, t, 0) + data.z_at(i, t, 1));
    }
  // the as-of day conditions on nothing: its total is a pure forecast
  CHECK(data.s_cond[5] == 0);
  CHECK(data.n_terms[5] == 0);
}

TEST_CASE("joint density equals an independently written evaluator") {
  std::mt19937 rng(6);
  HyperPriorSpec hp;
  for (int rep = 0; rep < 8; ++rep) {
    auto prob = random_problem(rng, 2 + static_cast<int>(rng() % 2), 7 + (rep % 3), 2);
    ModelState s = random_state(rng, prob->data);
    double a = log_joint(s, prob->data, hp);
    double b = ref_log_joint(s, prob->data, hp);
    REQUIRE(std::isfinite(a));
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
  // and on the documented compact shape
  auto prob = random_problem(rng, 2, 4, 2);
  ModelState s = random_state(rng, prob->data);
  CHECK(log_joint(s, prob->data, hp) ==
        doctest::Approx(ref_log_joint(s, prob->data, hp)).epsilon(1e-10));
}

TEST_CASE("joint density is the sum of its published blocks") {
  std::mt19937 rng(7);
  HyperPriorSpec hp;
  auto prob = random_problem(rng, 3, 8, 3);
  const ModelData& data = prob->data;
  ModelState s = random_state(rng, data);
  double total = 0.0;
  for (int i = 0; i < data.n; ++i) {
    for (int t = 0; t < data.len; ++t)
      total += log_poisson_outcome(i, t, s, data, hp) + log_delay_likelihood(i, t, s, data);
    total += log_latent_prior(i, s, data, hp) + log_trend_prior(i, s, data) +
             log_psi_prior(i, s, data);
  }
  total += log_icar_prior(s.centered_d(), *data.graph, s.tau2_d) +
           log_hierarchical_effects(s, hp) + log_hyper_priors(s, data, hp);
  CHECK(log_joint(s, data, hp) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("relabeling counties permutes nothing but the order") {
  // Build the same problem under two county orderings and compare the joint.
  std::mt19937 rng(8);
  AnalysisWindow w = test_window(7, 2);
  std::vector<std::pair<std::string, long long>> pops{{"a", 900}, {"b", 1700}, {"c", 600}};
  std::vector<std::pair<std::string, std::string>> edges{{"a", "b"}, {"b", "c"}};
  CountyGraph g1 = make_graph(pops, edges);
  CountyGraph g2 = make_graph({pops[2], pops[0], pops[1]}, edges);  // c,a,b order
  std::vector<LineListRecord> records;
  for (int k = 0; k < 300; ++k) {
    const char* ids[] = {"a", "b", "c"};
    LineListRecord r;
    r.county_id = ids[rng() % 3];
    r.onset = add_days(w.start(), static_cast<int>(rng() % w.length));
    r.report = add_days(r.onset, static_cast<int>(rng() % 3));
    records.push_back(r);
  }
  ReportingTriangle t1 = build_triangle(records, w, g1);
  ReportingTriangle t2 = build_triangle(records, w, g2);
  ModelData d1(t1, g1), d2(t2, g2);
  std::mt19937 srng(9);
  ModelState s1 = random_state(srng, d1);
  // express the same state in the second ordering: new index of (a,b,c) is (1,2,0)
  int map[3] = {1, 2, 0};
  ModelState s2 = s1;
  for (int i = 0; i < 3; ++i) {
    s2.alpha.row(map[i]) = s1.alpha.row(i);
    s2.delta.row(map[i]) = s1.delta.row(i);
    s2.d(map[i]) = s1.d(i);
    s2.eta.row(map[i]) = s1.eta.row(i);
    s2.xi.row(map[i]) = s1.xi.row(i);
    s2.y.row(map[i]) = s1.y.row(i);
    for (int t = 0; t < d1.len; ++t)
      for (int dd = 0; dd < d1.dmax; ++dd) s2.psi_at(map[i], t, dd) = s1.psi_at(i, t, dd);
  }
  HyperPriorSpec hp;
  double j1 = log_joint(s1, d1, hp);
  double j2 = log_joint(s2, d2, hp);
  REQUIRE(std::isfinite(j1));
  CHECK(j1 == doctest::Approx(j2).epsilon(1e-10));
}

TEST_CASE("recentering the spatial offsets never changes any density") {
  std::mt19937 rng(10);
  HyperPriorSpec hp;
  auto prob = random_problem(rng, 3, 7, 2);
  ModelState s = random_state(rng, prob->data);
  s.d(0) += 0.4;  // leave it off-center
  double before = log_joint(s, prob->data, hp);
  ModelState shifted = s;
  shifted.d.array() -= shifted.d.mean();
  double after = log_joint(shifted, prob->data, hp);
  CHECK(before == doctest::Approx(after).epsilon(1e-12));
  // adding any constant to every offset is also invisible
  shifted.d.array() += 5.0;
  CHECK(log_joint(shifted, prob->data, hp) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("analytic gradients of the smooth blocks match finite differences") {
  std::mt19937 rng(11);
  HyperPriorSpec hp;
  auto prob = random_problem(rng, 3, 7, 2);
  const ModelData& data = prob->data;
  ModelState s = random_state(rng, data);
  const double h = 1e-5;

  auto fd = [&](auto&& eval, double& slot) {
    double keep = slot;
    slot = keep + h;
    double up = eval();
    slot = keep - h;
    double down = eval();
    slot = keep;
    return (up - down) / (2.0 * h);
  };

  // latent level walk wrt alpha(i,t): own residual plus the lead residual
  for (int i = 0; i < data.n; ++i)
    for (int t : {0, 3, data.len - 1}) {
      double grad = 0.0;
      if (t == 0)
        grad += -(s.alpha(i, 0) - 0.0) / hp.alpha1_var;
      else
        grad += -(s.alpha(i, t) - s.alpha(i, t - 1) - s.delta(i, t - 1)) / s.tau2_alpha;
      if (t + 1 < data.len)
        grad += (s.alpha(i, t + 1) - s.alpha(i, t) - s.delta(i, t)) / s.tau2_alpha;
      double est = fd([&] { return log_latent_prior(i, s, data, hp); }, s.alpha(i, t));
      CHECK(est == doctest::Approx(grad).epsilon(1e-6));
    }

  // trend walk wrt delta(i,t)
  for (int i = 0; i < data.n; ++i)
    for (int t : {0, 2, data.len - 1}) {
      double level = s.delta_bar + s.centered_d()(i);
      double grad = 0.0;
      if (t == 0)
        grad += -(s.delta(i, 0) - level) / s.tau2_delta;
      else
        grad += -(s.delta(i, t) - level - s.rho_delta * (s.delta(i, t - 1) - level)) /
                s.tau2_delta;
      if (t + 1 < data.len)
        grad += s.rho_delta *
                (s.delta(i, t + 1) - level - s.rho_delta * (s.delta(i, t) - level)) /
                s.tau2_delta;
      double est = fd([&] { return log_trend_prior(i, s, data); }, s.delta(i, t));
      CHECK(est == doctest::Approx(grad).epsilon(1e-6));
    }

  // hazard walk wrt psi(i,t,d)
  for (int t : {0, 4, data.len - 1}) {
    int i = 1, d = 1;
    auto mu = [&](int tt) {
      return s.beta(d) + data.design.dot_v(tt, d, s.xi.row(i).transpose());
    };
    double grad = 0.0;
    if (t == 0)
      grad += -(s.psi_at(i, 0, d) - mu(0)) / s.tau2_psi;
    else
      grad += -(s.psi_at(i, t, d) - mu(t) - s.rho_psi * (s.psi_at(i, t - 1, d) - mu(t - 1))) /
              s.tau2_psi;
    if (t + 1 < data.len)
      grad += s.rho_psi *
              (s.psi_at(i, t + 1, d) - mu(t + 1) - s.rho_psi * (s.psi_at(i, t, d) - mu(t))) /
              s.tau2_psi;
    double est = fd([&] { return log_psi_prior(i, s, data); }, s.psi_at(i, t, d));
    CHECK(est == doctest::Approx(grad).epsilon(1e-6));
  }

  // hierarchy wrt a county effect and a shared effect
  {
    int i = 2, k = 3;
    double grad = -(s.eta(i, k) - s.eta_bar(k)) / s.tau2_eta;
    double est = fd([&] { return log_hierarchical_effects(s, hp); }, s.eta(i, k));
    CHECK(est == doctest::Approx(grad).epsilon(1e-6));
    double gbar = 0.0;
    for (int ii = 0; ii < data.n; ++ii) gbar += (s.eta(ii, k) - s.eta_bar(k)) / s.tau2_eta;
    gbar += -s.eta_bar(k) / hp.effect_var;
    double est2 = fd([&] { return log_hierarchical_effects(s, hp); }, s.eta_bar(k));
    CHECK(est2 == doctest::Approx(gbar).epsilon(1e-6));
  }

  // pairwise spatial block wrt one offset (of the centered vector)
  {
    Eigen::VectorXd c = s.centered_d();
    int i = 1;
    double grad = 0.0;
    for (int j : data.graph->neighbors[i]) grad += -(c(i) - c(j)) / s.tau2_d;
    double keep = c(i);
    c(i) = keep + h;
    double up = log_icar_prior(c, *data.graph, s.tau2_d);
    c(i) = keep - h;
    double down = log_icar_prior(c, *data.graph, s.tau2_d);
    CHECK((up - down) / (2.0 * h) == doctest::Approx(grad).epsilon(1e-6));
  }
}
