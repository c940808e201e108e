#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "model.hpp"
#include "rng.hpp"
#include "tuner.hpp"

namespace nowcast {

struct SamplerConfig {
  long long iterations = 30000;
  long long burn_in = 15000;
  long long thin = 10;
  int chains = 2;
  std::uint64_t seed = 0;
  long long adapt_interval = 200;
  double target_acceptance = 0.44;
  int threads = 1;
  bool monitor_full_state = false;  // adds every latent scalar (very wide output)

  void validate() const;  // throws InputError
  long long retained_draws() const { return (iterations - burn_in) / thin; }
};

// Retained draws of one chain: row per draw, column per monitored scalar.
struct ChainDraws {
  Eigen::MatrixXd values;
};

struct MultiChainDraws {
  std::vector<std::string> columns;
  std::vector<ChainDraws> chains;

  int column(const std::string& name) const;  // -1 when absent
  long long draws_per_chain() const {
    return chains.empty() ? 0 : chains.front().values.rows();
  }
  // All chains stacked in chain order (draw order preserved within chains).
  Eigen::VectorXd pooled(int col) const;
};

// Node families, used for tuner bookkeeping and acceptance-rate reporting.
enum class NodeFamily {
  alpha, trend, trend_mean, spatial, weekday_onset, weekday_onset_mean,
  weekday_report, weekday_report_mean, delay_intercept, dispersion, hazard,
  trend_ar, hazard_ar, latent_total,
};
const char* family_name(NodeFamily f);

// Change in the joint log density when one scalar moves to `v`, computed from
// the affected factors only. These are what the Metropolis steps use; a test
// checks each against a full log_joint difference.
namespace node_delta {
double alpha(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int i, int t,
             double v);
double trend(const ModelState& s, const ModelData& d, int i, int t, double v);
double trend_mean(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, double v);
double spatial(const ModelState& s, const ModelData& d, int i, double v);
double weekday_onset(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int i,
                     int k, double v);
double weekday_onset_mean(const ModelState& s, const HyperPriorSpec& hp, int k, double v);
double weekday_report(const ModelState& s, const ModelData& d, int i, int k, double v);
double weekday_report_mean(const ModelState& s, const HyperPriorSpec& hp, int k, double v);
double delay_intercept(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp,
                       int delay, double v);
double dispersion(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int delay,
                  double v);
double hazard(const ModelState& s, const ModelData& d, int i, int t, int delay, double v);
double trend_ar(const ModelState& s, const ModelData& d, double v);
double hazard_ar(const ModelState& s, const ModelData& d, double v);
double latent_total(const ModelState& s, const ModelData& d, const HyperPriorSpec& hp, int i,
                    int t, long long v);
}  // namespace node_delta

// Deterministic starting point: level set from the observed partial counts,
// hazards from the pooled empirical delay distribution, latent totals scaled
// up by the empirical reporting fraction at each day's observation depth.
ModelState initialize(const ModelData& data);

// Names of the monitored scalars, in draw-column order.
std::vector<std::string> monitor_columns(const ModelData& data, const SamplerConfig& cfg);
Eigen::VectorXd monitor_values(const ModelState& s, const ModelData& data,
                               const SamplerConfig& cfg);
// Days of the window whose true totals are monitored (last max_delay+1 days).
std::vector<int> monitored_total_days(const ModelData& data);
std::vector<int> monitored_trend_days(const ModelData& data);

// One MCMC chain: scalar random-walk Metropolis on every continuous latent,
// conjugate draws for the variance components, an independence step for each
// unobserved true total, and recentering of the spatial offsets.
class McmcSampler {
 public:
  McmcSampler(const ModelData& data, const HyperPriorSpec& hp, const SamplerConfig& cfg,
              int chain_index);

  const ModelState& state() const { return state_; }
  ModelState& state() { return state_; }
  void set_state(const ModelState& s) { state_ = s; }

  // One full sweep over all updates. `iteration` drives the adaptation
  // schedule; adaptation happens only while `adapting` is true.
  void sweep(long long iteration, bool adapting);
  ChainDraws run();  // full burn-in/thin schedule

  Rng& rng() { return rng_; }
  // Post-burn-in acceptance fraction per family.
  std::map<std::string, double> acceptance_rates() const;
  std::vector<double> tuner_scales(NodeFamily f) const;
  void update_latent_total(int i, int t);            // exposed for tests
  void update_variance_components();                 // conjugate draws
  void recenter_spatial();

  // The scalar random-walk kernel every continuous update is built from:
  // `delta` maps a proposed value to the change in the log target. Exposed
  // so the kernel can be checked against known distributions in isolation.
  void mh_step(NodeFamily f, std::size_t node, double& value,
               const std::function<double(double)>& delta);

 private:
  template <class DeltaFn>
  void metropolis(NodeFamily f, std::size_t node, double& value, DeltaFn&& delta);
  template <class DeltaFn, class ToUnconstrained, class ToValue>
  void metropolis_transformed(NodeFamily f, std::size_t node, double& value, DeltaFn&& delta,
                              ToUnconstrained&& fwd, ToValue&& back);
  void maybe_adapt(long long iteration, bool adapting);
  void freeze_tuners();

  const ModelData& data_;
  HyperPriorSpec hp_;
  SamplerConfig cfg_;
  ModelState state_;
  Rng rng_;
  std::map<NodeFamily, std::vector<StepTuner>> tuners_;
  bool frozen_ = false;
};

ChainDraws run_chain(const ModelData& data, const HyperPriorSpec& hp, const SamplerConfig& cfg,
                     int chain_index);

struct SamplerRun {
  MultiChainDraws draws;
  std::map<std::string, double> acceptance_rates;  // averaged over chains
};

// Runs cfg.chains chains (in parallel when cfg.threads > 1); results are
// independent of the thread count.
SamplerRun run_chains(const ModelData& data, const HyperPriorSpec& hp, const SamplerConfig& cfg);

}  // namespace nowcast
