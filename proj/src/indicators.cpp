#include "indicators.hpp"

#include <numeric>

#include "bspline.hpp"
#include "errors.hpp"

namespace nowcast {

namespace {
constexpr int kIndicatorDays = 21;

double window_mean(const std::vector<double>& series, int end_index, int window) {
  double sum = 0.0;
  for (int j = end_index - window + 1; j <= end_index; ++j) sum += series[j];
  return sum / window;
}
}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::rolling: return "rolling";
    case Method::spline: return "spline";
    case Method::model: return "model";
  }
  return "?";
}

std::vector<double> rolling_average(const std::vector<double>& series, int window) {
  const int n = static_cast<int>(series.size());
  if (window < 1) throw InputError("rolling window must be positive");
  if (n < kIndicatorDays + window - 1)
    throw InputError("count series too short: need at least " +
                     std::to_string(kIndicatorDays + window - 1) + " days, got " +
                     std::to_string(n));
  std::vector<double> out(kIndicatorDays);
  for (int k = 0; k < kIndicatorDays; ++k)
    out[k] = window_mean(series, n - kIndicatorDays + k, window);
  return out;
}

bool run_increase_flag(const std::vector<double>& values, double prior_value, int run_length) {
  if (run_length < 1) throw InputError("run length must be positive");
  int run = 0;
  double prev = prior_value;
  for (double v : values) {
    run = v > prev ? run + 1 : 0;
    if (run >= run_length) return true;
    prev = v;
  }
  return false;
}

bool rolling_flag(const std::vector<double>& series, int window, int run_length) {
  std::vector<double> avg = rolling_average(series, window);
  const int n = static_cast<int>(series.size());
  // 7-day average ending one day before the 21-day window, when it exists.
  double prior = n >= kIndicatorDays + window
                     ? window_mean(series, n - kIndicatorDays - 1, window)
                     : avg.front();
  return run_increase_flag(avg, prior, run_length);
}

bool spline_flag(const std::vector<double>& series, int window, int run_length) {
  std::vector<double> fit = fit_cubic_spline(rolling_average(series, window));
  return run_increase_flag(fit, fit.front(), run_length);
}

IndicatorResult rolling_indicator(const std::string& county_id, Date as_of,
                                  const std::vector<double>& series) {
  return {county_id, Method::rolling, rolling_flag(series), std::nullopt, as_of};
}

IndicatorResult spline_indicator(const std::string& county_id, Date as_of,
                                 const std::vector<double>& series) {
  return {county_id, Method::spline, spline_flag(series), std::nullopt, as_of};
}

}  // namespace nowcast
