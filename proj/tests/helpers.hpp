#pragma once

#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "model.hpp"

namespace nowcast::testutil {

// Graph + censored triangle + derived model data, kept together so the
// pointer inside ModelData stays valid for the helper's lifetime.
struct Problem {
  CountyGraph graph;
  AnalysisWindow window;
  ReportingTriangle tri;
  ModelData data;

  Problem(CountyGraph g, const AnalysisWindow& w, ReportingTriangle t)
      : graph(std::move(g)), window(w), tri(std::move(t)), data(tri, graph) {}
};

inline CountyGraph path_graph(int n, unsigned pop_seed = 0) {
  std::vector<std::pair<std::string, long long>> pops;
  std::vector<std::pair<std::string, std::string>> edges;
  std::mt19937 rng(pop_seed);
  for (int i = 0; i < n; ++i) {
    pops.emplace_back("c" + std::to_string(i), 500 + static_cast<long long>(rng() % 4500));
    if (i > 0) edges.emplace_back("c" + std::to_string(i - 1), "c" + std::to_string(i));
  }
  return make_graph(pops, edges);
}

inline AnalysisWindow test_window(int len, int dmax, const char* as_of = "2021-03-31") {
  AnalysisWindow w;
  w.as_of = parse_date(as_of);
  w.length = len;
  w.max_delay = dmax;
  w.validate_core();
  return w;
}

// Random observed triangle: small counts in every observable cell.
inline std::unique_ptr<Problem> random_problem(std::mt19937& rng, int n, int len, int dmax) {
  CountyGraph g = path_graph(n, rng());
  AnalysisWindow w = test_window(len, dmax);
  ReportingTriangle tri(w, n);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t)
      for (int d = 0; d <= dmax && t + d <= len - 1; ++d)
        tri.add(i, t, d, static_cast<long long>(rng() % 7));
  return std::make_unique<Problem>(std::move(g), w, std::move(tri));
}

// A dispersed but valid state: every latent near a plausible value, true
// totals at least the conditioned partial sums.
inline ModelState random_state(std::mt19937& rng, const ModelData& data) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = data.n, len = data.len, dmax = data.dmax;
  ModelState s = ModelState::zeros(n, len, dmax);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t) {
      double anchor = std::log(static_cast<double>(
                          data.s_cond[static_cast<std::size_t>(i) * len + t] + 1)) -
                      data.graph->offset[i];
      s.alpha(i, t) = anchor + 0.4 * u(rng);
      s.delta(i, t) = 0.08 * u(rng);
      s.y(i, t) = data.pinned[t]
                      ? data.y_full[static_cast<std::size_t>(i) * len + t]
                      : data.s_cond[static_cast<std::size_t>(i) * len + t] +
                            static_cast<long long>(rng() % 5);
    }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < len; ++t)
      for (int d = 0; d < dmax; ++d) s.psi_at(i, t, d) = -0.5 + 1.5 * u(rng);
  for (int d = 0; d < dmax; ++d) {
    s.beta(d) = 0.8 * u(rng);
    s.phi(d) = 8.0 + 6.0 * u(rng);
  }
  for (int i = 0; i < n; ++i) {
    s.d(i) = 0.15 * u(rng);
    for (int k = 0; k < 6; ++k) {
      s.eta(i, k) = 0.1 * u(rng);
      s.xi(i, k) = 0.1 * u(rng);
    }
  }
  for (int k = 0; k < 6; ++k) {
    s.eta_bar(k) = 0.1 * u(rng);
    s.xi_bar(k) = 0.1 * u(rng);
  }
  s.delta_bar = 0.05 * u(rng);
  s.rho_delta = 0.8 * u(rng);
  s.rho_psi = 0.8 * u(rng);
  s.tau2_alpha = 0.05 + 0.3 * std::abs(u(rng));
  s.tau2_delta = 0.05 + 0.3 * std::abs(u(rng));
  s.tau2_d = 0.05 + 0.3 * std::abs(u(rng));
  s.tau2_eta = 0.05 + 0.3 * std::abs(u(rng));
  s.tau2_psi = 0.05 + 0.3 * std::abs(u(rng));
  s.tau2_xi = 0.05 + 0.3 * std::abs(u(rng));
  return s;
}

}  // namespace nowcast::testutil
