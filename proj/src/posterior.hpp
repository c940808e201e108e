#pragma once

#include <string>
#include <vector>

#include "model.hpp"
#include "sampler.hpp"

namespace nowcast {

// One county-day nowcast: posterior mean and central 90% interval for the
// true count, next to the count observed so far.
struct NowcastRow {
  std::string county_id;
  Date date{};
  long long observed = 0;  // reports in hand (zero on the as-of day itself)
  double mean = 0.0;
  double lower = 0.0;  // 5th percentile
  double upper = 0.0;  // 95th percentile
};

// Per-county trend call: posterior probability that the recent trend total is
// positive, thresholded at the three standard cutpoints.
struct TrendRow {
  std::string county_id;
  double p_increase = 0.0;
  bool flag50 = false, flag70 = false, flag90 = false;
};

// Linear-interpolation sample quantile (the common spreadsheet/R default):
// h = (n-1)p, interpolate between the surrounding order statistics.
double quantile(std::vector<double> values, double p);

// Strict threshold: probability must exceed the cutpoint.
bool classify(double p_increase, double cutpoint);

// Fraction of pooled draws in which the 21-day trend sum of county i is
// positive.
double trend_probability(const MultiChainDraws& draws, const ModelData& data, int i);

std::vector<NowcastRow> nowcast_rows(const MultiChainDraws& draws, const ModelData& data);
std::vector<TrendRow> trend_rows(const MultiChainDraws& draws, const ModelData& data);

void write_nowcast_csv(const std::string& path, const std::vector<NowcastRow>& rows);
void write_trend_csv(const std::string& path, const std::vector<TrendRow>& rows);

}  // namespace nowcast
