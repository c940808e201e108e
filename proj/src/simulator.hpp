#pragma once

#include <optional>
#include <vector>

#include "model.hpp"
#include "rng.hpp"
#include "triangle.hpp"

namespace nowcast {

// Fixed parameter values for scenario generation. Anything left unset is
// drawn from its prior, so an empty override set yields a full prior
// replication (what the calibration tests need).
struct SimOverrides {
  std::optional<double> delta_bar, rho_delta, rho_psi;
  std::optional<double> tau2_alpha, tau2_delta, tau2_d, tau2_eta, tau2_psi, tau2_xi;
  std::optional<std::vector<double>> fixed_d;  // spatial offsets; recentered
  std::optional<std::vector<double>> beta;     // delay intercepts, length max_delay
  std::optional<std::vector<double>> phi;      // dispersions, length max_delay
  std::optional<double> alpha0;                // pins every county's initial log level
  // Discards and redraws any replication whose total count exceeds this.
  // The event depends on the counts alone, so posterior calibration against
  // the accepted replications is unaffected.
  std::optional<long long> max_total;
};

struct Simulation {
  ModelState state;                     // realized parameters and true counts
  std::vector<double> p;                // N*T*(D+1) realized delay fractions
  std::vector<long long> z;             // N*T*(D+1) complete (uncensored) counts
  std::vector<LineListRecord> records;  // one row per case, uncensored
  int redraws = 0;                      // replications discarded before this one

  long long z_at(int i, int t, int d, int len, int dmax) const {
    return z[(static_cast<std::size_t>(i) * len + t) * (dmax + 1) + d];
  }
};

// Forward-samples the full generative process on the given county graph and
// window. Replications violating the |log rate| guard are discarded and
// redrawn, mirroring the fitter, which rejects such states.
Simulation simulate(const CountyGraph& g, const AnalysisWindow& w, const HyperPriorSpec& hp,
                    const SimOverrides& o, Rng& rng);

// Redraws the counts (true totals, delay fractions, triangle cells, line
// list) conditional on the parameters already in sim.state. Returns false if
// the |log rate| guard is violated or the realized total exceeds max_total,
// leaving the count fields meaningless. Both rejections depend only on the
// totals, so they commute with conditioning on the accepted counts.
bool redraw_counts(Simulation& sim, const CountyGraph& g, const AnalysisWindow& w,
                   const HyperPriorSpec& hp, Rng& rng,
                   std::optional<long long> max_total = std::nullopt);

// Spatial offsets from the pairwise-difference prior: independent normal
// coefficients on the non-null eigenvectors of the graph Laplacian.
Eigen::VectorXd draw_spatial_offsets(const CountyGraph& g, double tau2_d, Rng& rng);

// Drops records that have not arrived by the as-of date.
std::vector<LineListRecord> censor(const std::vector<LineListRecord>& records, Date as_of);

void write_truth_csv(const std::string& path, const CountyGraph& g, const AnalysisWindow& w,
                     const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& y);
// Truth matrix keyed like the simulator output: county_id,onset_date,count.
Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> load_truth_csv(
    const std::string& path, const CountyIndex& counties, const AnalysisWindow& w);

}  // namespace nowcast
