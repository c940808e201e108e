#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace nowcast {

// Per-node random-walk step size, adapted on the log scale toward a target
// acceptance rate during burn-in and frozen afterwards (continued adaptation
// would break the chain's stationary distribution).
class StepTuner {
 public:
  explicit StepTuner(double initial_scale = 1.0) : log_scale_(std::log(initial_scale)) {}

  double scale() const { return std::exp(log_scale_); }

  void record(bool accepted) {
    ++window_attempts_;
    ++total_attempts_;
    if (accepted) {
      ++window_accepts_;
      ++total_accepts_;
    }
  }

  // Nudges the scale by the window's acceptance-rate error, then starts a new
  // window. No-op once frozen.
  void adapt(double target) {
    if (frozen_ || window_attempts_ == 0) return;
    double rate = static_cast<double>(window_accepts_) / window_attempts_;
    log_scale_ += rate - target;
    log_scale_ = std::clamp(log_scale_, -12.0, 6.0);
    window_attempts_ = window_accepts_ = 0;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::int64_t attempts() const { return total_attempts_; }
  std::int64_t accepts() const { return total_accepts_; }
  void reset_totals() { total_attempts_ = total_accepts_ = 0; }

 private:
  double log_scale_;
  bool frozen_ = false;
  std::int64_t window_attempts_ = 0, window_accepts_ = 0;
  std::int64_t total_attempts_ = 0, total_accepts_ = 0;
};

}  // namespace nowcast
