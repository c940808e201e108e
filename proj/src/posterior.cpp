#include "posterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "csv.hpp"
#include "errors.hpp"

namespace nowcast {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

bool classify(double p_increase, double cutpoint) { return p_increase > cutpoint; }

double trend_probability(const MultiChainDraws& draws, const ModelData& data, int i) {
  auto days = monitored_trend_days(data);
  std::vector<int> cols;
  for (int t : days) {
    std::string name =
        "delta_" + data.graph->county_ids[i] + "_" + format_date(data.window.date_of_day(t));
    int c = draws.column(name);
    if (c < 0) throw InputError("draws are missing trend column " + name);
    cols.push_back(c);
  }
  long long positive = 0, total = 0;
  for (const auto& ch : draws.chains) {
    for (long long r = 0; r < ch.values.rows(); ++r) {
      double sum = 0.0;
      for (int c : cols) sum += ch.values(r, c);
      if (sum > 0.0) ++positive;
      ++total;
    }
  }
  if (total == 0) throw InputError("no draws to summarize");
  return static_cast<double>(positive) / static_cast<double>(total);
}

std::vector<NowcastRow> nowcast_rows(const MultiChainDraws& draws, const ModelData& data) {
  std::vector<NowcastRow> rows;
  for (int i = 0; i < data.n; ++i) {
    for (int t : monitored_total_days(data)) {
      std::string name =
          "y_" + data.graph->county_ids[i] + "_" + format_date(data.window.date_of_day(t));
      int c = draws.column(name);
      if (c < 0) throw InputError("draws are missing count column " + name);
      Eigen::VectorXd pooled = draws.pooled(c);
      std::vector<double> vals(pooled.data(), pooled.data() + pooled.size());
      NowcastRow row;
      row.county_id = data.graph->county_ids[i];
      row.date = data.window.date_of_day(t);
      row.observed = data.s_cond[static_cast<std::size_t>(i) * data.len + t];
      row.mean = pooled.mean();
      row.lower = quantile(vals, 0.05);
      row.upper = quantile(vals, 0.95);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<TrendRow> trend_rows(const MultiChainDraws& draws, const ModelData& data) {
  std::vector<TrendRow> rows;
  for (int i = 0; i < data.n; ++i) {
    TrendRow row;
    row.county_id = data.graph->county_ids[i];
    row.p_increase = trend_probability(draws, data, i);
    row.flag50 = classify(row.p_increase, 0.5);
    row.flag70 = classify(row.p_increase, 0.7);
    row.flag90 = classify(row.p_increase, 0.9);
    rows.push_back(row);
  }
  return rows;
}

void write_nowcast_csv(const std::string& path, const std::vector<NowcastRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "county_id,onset_date,observed,mean,lower90,upper90\n";
  for (const auto& r : rows)
    out << r.county_id << ',' << format_date(r.date) << ',' << r.observed << ','
        << format_real(r.mean) << ',' << format_real(r.lower) << ',' << format_real(r.upper)
        << '\n';
}

void write_trend_csv(const std::string& path, const std::vector<TrendRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "county_id,p_increase,flag50,flag70,flag90\n";
  for (const auto& r : rows)
    out << r.county_id << ',' << format_real(r.p_increase) << ',' << (r.flag50 ? 1 : 0) << ','
        << (r.flag70 ? 1 : 0) << ',' << (r.flag90 ? 1 : 0) << '\n';
}

}  // namespace nowcast
