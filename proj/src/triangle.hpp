#pragma once

#include <string>
#include <vector>

#include "dates.hpp"
#include "graph.hpp"

namespace nowcast {

struct LineListRecord {
  std::string county_id;
  Date onset{};
  Date report{};
};

// Moving analysis window. Days are indexed 0..length-1 internally; day
// length-1 is the as-of date. The window must hold the 21-day indicator plus
// its 7-day warm-up, and the maximum delay must fit strictly inside it.
struct AnalysisWindow {
  Date as_of{};
  int length = 90;
  int max_delay = 30;

  // Structural checks every window needs (positive length, delay fits).
  void validate_core() const;
  // Full analysis-window contract: additionally requires the 21-day
  // indicator plus its 7-day warm-up to fit (length >= 28). Enforced at the
  // command layer; reduced models in tests only need the core checks.
  void validate() const;
  Date start() const { return add_days(as_of, -(length - 1)); }
  Date date_of_day(int t) const { return add_days(as_of, t - (length - 1)); }
  // Signed day index; may fall outside [0, length).
  int day_of_date(Date d) const {
    return static_cast<int>((d - start()).count());
  }
};

// Counts Z[county][onset day][delay], delays 0..max_delay. Cell (t, d) is
// observable at the as-of date iff t + d <= length-1; later cells are censored
// and stay zero. Records whose delay exceeds max_delay are counted in
// dropped_late rather than folded into the last bucket, which would bias the
// final delay proportion.
class ReportingTriangle {
 public:
  ReportingTriangle(const AnalysisWindow& window, int n_counties);

  int n_counties() const { return n_; }
  int length() const { return window_.length; }
  int max_delay() const { return window_.max_delay; }
  const AnalysisWindow& window() const { return window_; }

  bool observed(int t, int d) const { return t + d <= window_.length - 1; }
  long long count(int i, int t, int d) const { return z_[idx(i, t, d)]; }
  void add(int i, int t, int d, long long count);

  long long dropped_late() const { return dropped_late_; }
  void add_dropped_late(long long k) { dropped_late_ += k; }

  // Sum of the observed cells in row (i, t); equals the complete count once
  // t + max_delay <= length-1.
  long long partial_total(int i, int t) const;
  // S as an n_counties x length matrix (row-major vector of vectors).
  std::vector<std::vector<long long>> partial_totals() const;

  long long total_count() const;

 private:
  std::size_t idx(int i, int t, int d) const;

  AnalysisWindow window_;
  int n_;
  std::vector<long long> z_;
  long long dropped_late_ = 0;
};

// Bins line-list records into a triangle. Records with onset outside the
// window are ignored; records reported after the as-of date have not arrived
// yet and are likewise ignored; arrived records with delay > max_delay are
// tallied in dropped_late. A report date before the onset date is an error.
ReportingTriangle build_triangle(const std::vector<LineListRecord>& records,
                                 const AnalysisWindow& window, const CountyIndex& counties);
ReportingTriangle build_triangle(const std::vector<LineListRecord>& records,
                                 const AnalysisWindow& window, const CountyGraph& counties);

std::vector<LineListRecord> load_line_list(const std::string& path);

// Aggregate alternative to the line list: rows county_id,onset_date,delay,count.
ReportingTriangle load_triangle_counts(const std::string& path, const AnalysisWindow& window,
                                       const CountyIndex& counties);

void write_line_list(const std::string& path, const std::vector<LineListRecord>& records);

}  // namespace nowcast
