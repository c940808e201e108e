#include "diagnostics.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace nowcast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Eigen::VectorXd> split_halves(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> halves;
  for (const auto& c : chains) {
    long long n = c.size() / 2;
    if (n < 1) continue;
    halves.push_back(c.head(n));
    halves.push_back(c.tail(n));  // odd length: middle draw dropped
  }
  return halves;
}

struct Variances {
  double w = 0.0;         // mean within-chain variance
  double var_plus = 0.0;  // marginal posterior variance estimate
  bool degenerate = true;
};

Variances chain_variances(const std::vector<Eigen::VectorXd>& halves) {
  Variances out;
  long long m = static_cast<long long>(halves.size());
  long long n = halves.front().size();
  if (m < 2 || n < 2) return out;
  Eigen::VectorXd means(m);
  double w = 0.0;
  for (long long s = 0; s < m; ++s) {
    means(s) = halves[s].mean();
    w += (halves[s].array() - means(s)).square().sum() / (n - 1);
  }
  w /= m;
  double b_over_n = (means.array() - means.mean()).square().sum() / (m - 1);
  out.w = w;
  out.var_plus = (n - 1.0) / n * w + b_over_n;
  out.degenerate = !(out.var_plus > 0.0) || !std::isfinite(out.var_plus);
  return out;
}
}  // namespace

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2) return kNaN;
  auto halves = split_halves(chains);
  auto v = chain_variances(halves);
  if (v.degenerate || !(v.w > 0.0)) return kNaN;
  return std::sqrt(v.var_plus / v.w);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  auto halves = split_halves(chains);
  if (halves.empty()) return kNaN;
  auto v = chain_variances(halves);
  if (v.degenerate) return kNaN;
  long long m = static_cast<long long>(halves.size());
  long long n = halves.front().size();

  // Lag-t autocovariances averaged over chains, evaluated lazily: the Geyer
  // rule usually stops long before lag n.
  std::vector<Eigen::VectorXd> centered(halves.size());
  for (std::size_t s = 0; s < halves.size(); ++s)
    centered[s] = halves[s].array() - halves[s].mean();
  auto mean_acov = [&](long long t) {
    double sum = 0.0;
    for (const auto& c : centered)
      sum += c.head(n - t).dot(c.tail(n - t)) / n;
    return sum / m;
  };

  auto rho = [&](long long t) { return 1.0 - (v.w - mean_acov(t)) / v.var_plus; };

  // Pair sums P_k = rho(2k) + rho(2k+1); keep while positive, enforce
  // monotone non-increasing, tau = -1 + 2 * sum.
  double tau = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (long long k = 0; 2 * k + 1 < n; ++k) {
    double pair = (2 * k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau -= 1.0;
  if (!(tau > 0.0)) tau = 1.0;
  return static_cast<double>(m) * n / tau;
}

std::map<std::string, ScalarDiagnostics> diagnostics(const MultiChainDraws& draws) {
  if (draws.chains.empty()) throw InputError("no chains to diagnose");
  if (draws.draws_per_chain() < 100)
    throw InputError("diagnostics need at least 100 retained draws per chain");
  std::map<std::string, ScalarDiagnostics> out;
  for (std::size_t col = 0; col < draws.columns.size(); ++col) {
    std::vector<Eigen::VectorXd> per_chain;
    for (const auto& ch : draws.chains) per_chain.push_back(ch.values.col(col));
    ScalarDiagnostics d;
    d.rhat = split_rhat(per_chain);
    d.ess = effective_sample_size(per_chain);
    out[draws.columns[col]] = d;
  }
  return out;
}

}  // namespace nowcast
