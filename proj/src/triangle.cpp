#include "triangle.hpp"

#include <fstream>

#include "csv.hpp"
#include "errors.hpp"

namespace nowcast {

void AnalysisWindow::validate_core() const {
  if (length < 2) throw InputError("window length must be at least 2 days");
  if (max_delay < 1) throw InputError("max delay must be at least 1 day");
  if (max_delay >= length) throw InputError("max delay must be smaller than the window length");
}

void AnalysisWindow::validate() const {
  validate_core();
  if (length < 28) throw InputError("window length must be at least 28 days");
}

ReportingTriangle::ReportingTriangle(const AnalysisWindow& window, int n_counties)
    : window_(window), n_(n_counties) {
  window_.validate_core();
  if (n_ < 1) throw InputError("triangle needs at least one county");
  z_.assign(static_cast<std::size_t>(n_) * window_.length * (window_.max_delay + 1), 0);
}

std::size_t ReportingTriangle::idx(int i, int t, int d) const {
  return (static_cast<std::size_t>(i) * window_.length + t) * (window_.max_delay + 1) + d;
}

void ReportingTriangle::add(int i, int t, int d, long long count) {
  if (count < 0) throw InputError("negative count in triangle cell");
  z_[idx(i, t, d)] += count;
}

long long ReportingTriangle::partial_total(int i, int t) const {
  long long s = 0;
  for (int d = 0; d <= window_.max_delay && observed(t, d); ++d) s += z_[idx(i, t, d)];
  return s;
}

std::vector<std::vector<long long>> ReportingTriangle::partial_totals() const {
  std::vector<std::vector<long long>> s(n_, std::vector<long long>(window_.length, 0));
  for (int i = 0; i < n_; ++i)
    for (int t = 0; t < window_.length; ++t) s[i][t] = partial_total(i, t);
  return s;
}

long long ReportingTriangle::total_count() const {
  long long sum = 0;
  for (long long v : z_) sum += v;
  return sum;
}

ReportingTriangle build_triangle(const std::vector<LineListRecord>& records,
                                 const AnalysisWindow& window, const CountyGraph& counties) {
  return build_triangle(records, window, counties.counties());
}

ReportingTriangle build_triangle(const std::vector<LineListRecord>& records,
                                 const AnalysisWindow& window, const CountyIndex& counties) {
  ReportingTriangle tri(window, counties.size());
  for (std::size_t row = 0; row < records.size(); ++row) {
    const auto& rec = records[row];
    int i = counties.require_index(rec.county_id);
    long long delay = (rec.report - rec.onset).count();
    if (delay < 0)
      throw InputError("record " + std::to_string(row + 1) + " (county " + rec.county_id +
                       ", onset " + format_date(rec.onset) + "): report date precedes onset date");
    int t = window.day_of_date(rec.onset);
    if (t < 0 || t >= window.length) continue;   // outside the moving window
    if (rec.report > window.as_of) continue;     // not yet arrived at the as-of date
    if (delay > window.max_delay) {
      tri.add_dropped_late(1);
      continue;
    }
    tri.add(i, t, static_cast<int>(delay), 1);
  }
  return tri;
}

std::vector<LineListRecord> load_line_list(const std::string& path) {
  CsvTable table = read_csv_file(path);
  require_header(table, {"county_id", "onset_date", "report_date"}, path);
  std::vector<LineListRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows)
    records.push_back({row[0], parse_date(row[1]), parse_date(row[2])});
  return records;
}

ReportingTriangle load_triangle_counts(const std::string& path, const AnalysisWindow& window,
                                       const CountyIndex& counties) {
  CsvTable table = read_csv_file(path);
  require_header(table, {"county_id", "onset_date", "delay", "count"}, path);
  ReportingTriangle tri(window, counties.size());
  for (const auto& row : table.rows) {
    int i = counties.require_index(row[0]);
    Date onset = parse_date(row[1]);
    long long delay = parse_int(row[2], "delay");
    long long count = parse_int(row[3], "count");
    if (delay < 0) throw InputError("negative delay for county " + row[0]);
    if (count < 0) throw InputError("negative count for county " + row[0]);
    int t = window.day_of_date(onset);
    if (t < 0 || t >= window.length) continue;
    if (delay > window.max_delay) {
      tri.add_dropped_late(count);
      continue;
    }
    if (!tri.observed(t, static_cast<int>(delay))) continue;  // censored at the as-of date
    tri.add(i, t, static_cast<int>(delay), count);
  }
  return tri;
}

void write_line_list(const std::string& path, const std::vector<LineListRecord>& records) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "county_id,onset_date,report_date\n";
  for (const auto& rec : records)
    out << rec.county_id << ',' << format_date(rec.onset) << ',' << format_date(rec.report)
        << '\n';
}

}  // namespace nowcast
