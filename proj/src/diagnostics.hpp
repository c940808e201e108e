#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "sampler.hpp"

namespace nowcast {

struct ScalarDiagnostics {
  double rhat = 0.0;  // NaN with a single chain or a degenerate column
  double ess = 0.0;   // NaN for a degenerate column
};

// Split potential scale reduction: each chain is halved, then the usual
// between/within variance ratio. NaN when only one chain was run (the halves
// of one chain share its transient, so the statistic would be misleading) or
// when the pooled variance is zero.
double split_rhat(const std::vector<Eigen::VectorXd>& chains);

// Multi-chain effective sample size with Geyer's initial-monotone truncation
// of the pairwise autocorrelation sums. Chains are split-halved first.
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

// Per-column diagnostics. Requires at least 100 retained draws per chain;
// shorter runs give meaningless statistics and are rejected outright.
std::map<std::string, ScalarDiagnostics> diagnostics(const MultiChainDraws& draws);

}  // namespace nowcast
