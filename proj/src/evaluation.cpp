#include "evaluation.hpp"

#include "errors.hpp"

namespace nowcast {

bool true_increase(const std::vector<long long>& series) {
  if (series.size() < 21) throw InputError("trend label needs at least 21 days of truth");
  std::size_t n = series.size();
  long long recent = 0, reference = 0;
  for (std::size_t k = n - 7; k < n; ++k) recent += series[k];
  for (std::size_t k = n - 21; k < n - 14; ++k) reference += series[k];
  return recent > reference;
}

void Confusion::add(bool flagged, bool truth) {
  if (truth)
    ++(flagged ? tp : fn);
  else
    ++(flagged ? fp : tn);
}

std::optional<double> Confusion::sensitivity() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> Confusion::specificity() const {
  if (tn + fp == 0) return std::nullopt;
  return static_cast<double>(tn) / static_cast<double>(tn + fp);
}

CoverageResult interval_coverage(const std::vector<NowcastRow>& rows,
                                 const std::vector<long long>& truths, Date from, Date to) {
  if (rows.size() != truths.size())
    throw InputError("coverage needs one truth per nowcast row");
  CoverageResult out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].date < from || rows[k].date > to) continue;
    ++out.total;
    double y = static_cast<double>(truths[k]);
    if (y >= rows[k].lower && y <= rows[k].upper) ++out.covered;
  }
  return out;
}

}  // namespace nowcast
