#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dates.hpp"

namespace nowcast {

enum class Method { rolling, spline, model };

const char* method_name(Method m);

struct IndicatorResult {
  std::string county_id;
  Method method = Method::rolling;
  bool flagged = false;
  std::optional<double> probability;  // model method only
  Date as_of{};
};

// 7-day trailing means for the last 21 days of `series` (daily counts ending
// at the as-of date, length >= 27). Output k ends on day T-21+k+1 (k=0..20).
std::vector<double> rolling_average(const std::vector<double>& series, int window = 7);

// True iff `values` (oldest to newest) contain run_length consecutive strict
// day-over-day increases; the first value is compared against prior_value.
bool run_increase_flag(const std::vector<double>& values, double prior_value,
                       int run_length = 5);

// Rolling-average indicator: flag a county when its 7-day averages rise for
// run_length consecutive days anywhere in the 21-day window. The first
// average is compared against the 7-day average of the preceding day when 28+
// days of counts are available; with exactly 27 days that average does not
// exist and the first comparison degenerates to false.
bool rolling_flag(const std::vector<double>& series, int window = 7, int run_length = 5);

// Spline indicator: the same run rule applied to the least-squares cubic
// spline fit of the 21 rolling averages. Fits exist only inside the window,
// so the first fitted value serves only as the comparison baseline.
bool spline_flag(const std::vector<double>& series, int window = 7, int run_length = 5);

IndicatorResult rolling_indicator(const std::string& county_id, Date as_of,
                                  const std::vector<double>& series);
IndicatorResult spline_indicator(const std::string& county_id, Date as_of,
                                 const std::vector<double>& series);

}  // namespace nowcast
