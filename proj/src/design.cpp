#include "design.hpp"

namespace nowcast {

Eigen::RowVector<double, 6> WeekdayDesign::encode_weekday(int iso_day) {
  Eigen::RowVector<double, 6> row = Eigen::RowVector<double, 6>::Zero();
  if (iso_day == 7)
    row.setConstant(-1.0);
  else
    row(iso_day - 1) = 1.0;
  return row;
}

WeekdayDesign::WeekdayDesign(const AnalysisWindow& window) {
  int days = window.length + window.max_delay;
  rows_.resize(days, 6);
  for (int t = 0; t < days; ++t)
    rows_.row(t) = encode_weekday(iso_weekday(window.date_of_day(t)));
}

}  // namespace nowcast
