#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dates.hpp"
#include "posterior.hpp"

namespace nowcast {

// Ground-truth label for one county series over an analysis window: did the
// final week's complete count strictly exceed the week ending two weeks
// earlier? A flat series is not an increase.
bool true_increase(const std::vector<long long>& series);

struct Confusion {
  long long tp = 0, fp = 0, tn = 0, fn = 0;

  void add(bool flagged, bool truth);
  long long total() const { return tp + fp + tn + fn; }
  // Absent (not zero) when the denominator is empty.
  std::optional<double> sensitivity() const;
  std::optional<double> specificity() const;
};

// Fraction of rows whose true count lies inside [lower, upper], restricted to
// dates in [from, to]. Pairs rows positionally with per-row truths.
struct CoverageResult {
  long long covered = 0, total = 0;
  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(covered) / total; }
};
CoverageResult interval_coverage(const std::vector<NowcastRow>& rows,
                                 const std::vector<long long>& truths, Date from, Date to);

}  // namespace nowcast
