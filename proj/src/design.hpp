#pragma once

#include <Eigen/Dense>

#include "triangle.hpp"

namespace nowcast {

// Sum-to-zero effect coding of the weekday, Monday = level 1 .. Sunday =
// level 7: weekdays 1..6 map to the standard basis vectors of R^6 and Sunday
// to (-1,...,-1), so any full week of rows sums to zero. Rows cover calendar
// days 0..length-1+max_delay: row t is the onset-day coding X_t, and row t+d
// doubles as the report-day coding V_td.
class WeekdayDesign {
 public:
  explicit WeekdayDesign(const AnalysisWindow& window);

  int days() const { return static_cast<int>(rows_.rows()); }
  const Eigen::Matrix<double, Eigen::Dynamic, 6>& rows() const { return rows_; }

  // Onset-day covariate row for day t.
  Eigen::RowVector<double, 6> x(int t) const { return rows_.row(t); }
  // Report-day covariate row for onset day t, delay d.
  Eigen::RowVector<double, 6> v(int t, int d) const { return rows_.row(t + d); }

  double dot_x(int t, const Eigen::VectorXd& coef) const { return rows_.row(t) * coef; }
  double dot_v(int t, int d, const Eigen::VectorXd& coef) const {
    return rows_.row(t + d) * coef;
  }

  static Eigen::RowVector<double, 6> encode_weekday(int iso_day);

 private:
  Eigen::Matrix<double, Eigen::Dynamic, 6> rows_;
};

}  // namespace nowcast
