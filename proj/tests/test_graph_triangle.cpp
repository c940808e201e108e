#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "design.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "triangle.hpp"

using namespace nowcast;

namespace {
CountyGraph pair_graph() {
  return make_graph({{"a", 1000}, {"b", 2000}}, {{"a", "b"}});
}

AnalysisWindow small_window(int length = 10, int max_delay = 3) {
  AnalysisWindow w;
  w.as_of = parse_date("2021-03-10");
  w.length = length;
  w.max_delay = max_delay;
  return w;
}
}  // namespace

TEST_CASE("county graphs expose sorted adjacency, log offsets, unique edges") {
  CountyGraph g = make_graph({{"a", 100}, {"b", 200}, {"c", 300}},
                             {{"a", "b"}, {"b", "c"}, {"b", "a"}});  // duplicate edge
  CHECK(g.size() == 3);
  CHECK(g.offset[1] == doctest::Approx(std::log(200.0)));
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(1, 0));
  CHECK_FALSE(g.adjacent(0, 2));
  CHECK(g.degree[1] == 2);
  CHECK(g.edges.size() == 2);
  for (auto [i, j] : g.edges) CHECK(i < j);
  CHECK(g.neighbors[1] == std::vector<int>{0, 2});
  CHECK(g.require_index("c") == 2);
  CHECK_THROWS_AS(g.require_index("zz"), InputError);
}

TEST_CASE("graph construction rejects malformed inputs") {
  CHECK_THROWS_AS(make_graph({{"a", 100}, {"a", 200}}, {{"a", "a"}}), InputError);  // dup id
  CHECK_THROWS_AS(make_graph({{"a", 100}, {"b", 200}}, {{"a", "a"}}), InputError);  // self loop
  CHECK_THROWS_AS(make_graph({{"a", 100}, {"b", 200}}, {{"a", "zz"}}), InputError);
  CHECK_THROWS_AS(make_graph({{"a", 0}, {"b", 200}}, {{"a", "b"}}), InputError);  // population
  // isolated county: the pairwise spatial prior has no conditional for it
  CHECK_THROWS_AS(make_graph({{"a", 100}, {"b", 200}, {"c", 300}}, {{"a", "b"}}), InputError);
  CHECK_THROWS_AS(make_graph({}, {}), InputError);
}

TEST_CASE("grid graphs use rook adjacency") {
  CountyGraph g = grid_graph(3, 3, 500);
  CHECK(g.size() == 9);
  int center = g.require_index("r1c1");
  int corner = g.require_index("r0c0");
  int edge_cell = g.require_index("r0c1");
  CHECK(g.degree[center] == 4);
  CHECK(g.degree[corner] == 2);
  CHECK(g.degree[edge_cell] == 3);
  CHECK(g.adjacent(corner, edge_cell));
  CHECK_FALSE(g.adjacent(corner, center));  // diagonal
  CHECK(g.edges.size() == 12);              // 2*3*2 horizontal+vertical
  CHECK_THROWS_AS(grid_graph(1, 1, 10), InputError);
}

TEST_CASE("windows map dates to day indices and validate their shape") {
  AnalysisWindow w = small_window(10, 3);
  CHECK(format_date(w.start()) == "2021-03-01");
  CHECK(w.day_of_date(w.as_of) == 9);
  for (int t = 0; t < w.length; ++t) CHECK(w.day_of_date(w.date_of_day(t)) == t);
  CHECK(w.day_of_date(parse_date("2021-02-28")) == -1);
  CHECK_NOTHROW(w.validate_core());
  CHECK_THROWS_AS(w.validate(), InputError);  // indicator needs >= 28 days

  AnalysisWindow ok = small_window(28, 3);
  CHECK_NOTHROW(ok.validate());
  AnalysisWindow bad = small_window(10, 10);  // delay must fit strictly inside
  CHECK_THROWS_AS(bad.validate_core(), InputError);
  AnalysisWindow nodelay = small_window(10, 0);
  CHECK_THROWS_AS(nodelay.validate_core(), InputError);
}

TEST_CASE("triangle cells are censored exactly when onset+delay passes the as-of day") {
  AnalysisWindow w = small_window(10, 3);
  ReportingTriangle tri(w, 2);
  for (int t = 0; t < w.length; ++t)
    for (int d = 0; d <= w.max_delay; ++d) {
      CHECK(tri.observed(t, d) == (t + d <= w.length - 1));
      // censorship is monotone: later delays on the same day stay censored
      if (!tri.observed(t, d) && d < w.max_delay) CHECK_FALSE(tri.observed(t, d + 1));
    }
}

TEST_CASE("line lists bin into the triangle with conservation and order invariance") {
  AnalysisWindow w = small_window(10, 3);
  CountyGraph g = pair_graph();
  std::vector<LineListRecord> records;
  std::mt19937 shuffle_rng(7);
  int in_window_arrived = 0, late = 0;
  for (int k = 0; k < 500; ++k) {
    LineListRecord r;
    r.county_id = (k % 3 == 0) ? "a" : "b";
    int t = static_cast<int>(shuffle_rng() % 14) - 2;  // some outside the window
    int d = static_cast<int>(shuffle_rng() % 6);       // some beyond max delay
    r.onset = add_days(w.start(), t);
    r.report = add_days(r.onset, d);
    records.push_back(r);
    if (t < 0 || t >= w.length) continue;
    if (r.report > w.as_of) continue;
    if (d > w.max_delay)
      ++late;
    else
      ++in_window_arrived;
  }
  ReportingTriangle tri = build_triangle(records, w, g);
  long long total = 0;
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < w.length; ++t)
      for (int d = 0; d <= w.max_delay; ++d) {
        if (!tri.observed(t, d)) CHECK(tri.count(i, t, d) == 0);
        total += tri.count(i, t, d);
      }
  CHECK(total == in_window_arrived);
  CHECK(tri.dropped_late() == late);
  CHECK(tri.total_count() == total);

  // permutation invariance
  auto shuffled = records;
  std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
  ReportingTriangle tri2 = build_triangle(shuffled, w, g);
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < w.length; ++t)
      for (int d = 0; d <= w.max_delay; ++d) CHECK(tri.count(i, t, d) == tri2.count(i, t, d));

  // partial totals match a direct sum over observed cells
  auto totals = tri.partial_totals();
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < w.length; ++t) {
      long long s = 0;
      for (int d = 0; d <= w.max_delay && tri.observed(t, d); ++d) s += tri.count(i, t, d);
      CHECK(totals[i][t] == s);
      CHECK(tri.partial_total(i, t) == s);
    }
}

TEST_CASE("triangle building rejects impossible records") {
  AnalysisWindow w = small_window(10, 3);
  CountyGraph g = pair_graph();
  std::vector<LineListRecord> bad{{"a", parse_date("2021-03-05"), parse_date("2021-03-04")}};
  CHECK_THROWS_WITH_AS(build_triangle(bad, w, g),
                       doctest::Contains("report date precedes onset date"), InputError);
  std::vector<LineListRecord> unknown{{"zz", parse_date("2021-03-05"), parse_date("2021-03-05")}};
  CHECK_THROWS_AS(build_triangle(unknown, w, g), InputError);
}

TEST_CASE("aggregate counts load like an equivalent line list") {
  AnalysisWindow w = small_window(10, 3);
  CountyIndex counties = CountyIndex::from_ids({"a", "b"});
  auto dir = std::filesystem::temp_directory_path();
  auto path = (dir / "nc_test_counts.csv").string();
  {
    std::ofstream out(path);
    out << "county_id,onset_date,delay,count\n";
    out << "a,2021-03-03,0,4\n";
    out << "a,2021-03-03,2,1\n";
    out << "b,2021-03-09,1,7\n";   // not yet observed: report day = Mar 10+? (t=8,d=1 -> t+d=9 ok)
    out << "b,2021-03-01,4,5\n";   // beyond max delay -> dropped_late
    out << "a,2021-02-20,1,9\n";   // outside window -> ignored
  }
  ReportingTriangle tri = load_triangle_counts(path, w, counties);
  CHECK(tri.count(0, 2, 0) == 4);
  CHECK(tri.count(0, 2, 2) == 1);
  CHECK(tri.count(1, 8, 1) == 7);
  CHECK(tri.dropped_late() == 5);
  CHECK(tri.total_count() == 12);
  std::remove(path.c_str());

  auto negpath = (dir / "nc_test_counts_neg.csv").string();
  {
    std::ofstream out(negpath);
    out << "county_id,onset_date,delay,count\na,2021-03-03,-1,4\n";
  }
  CHECK_THROWS_AS(load_triangle_counts(negpath, w, counties), InputError);
  std::remove(negpath.c_str());
}

TEST_CASE("line lists round trip through files") {
  std::vector<LineListRecord> records{
      {"a", parse_date("2021-03-01"), parse_date("2021-03-02")},
      {"b", parse_date("2021-03-04"), parse_date("2021-03-04")},
  };
  auto path = (std::filesystem::temp_directory_path() / "nc_test_ll.csv").string();
  write_line_list(path, records);
  auto loaded = load_line_list(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[1].county_id == "b");
  CHECK(loaded[0].report == records[0].report);
  std::remove(path.c_str());
}

TEST_CASE("weekday coding sums to zero over any week") {
  AnalysisWindow w = small_window(10, 3);
  WeekdayDesign design(w);
  CHECK(design.days() == w.length + w.max_delay);
  // each row matches the day-of-week coding: weekday k<7 -> e_k, Sunday -> -1
  for (int t = 0; t < design.days(); ++t) {
    int wd = iso_weekday(add_days(w.start(), t));
    Eigen::RowVector<double, 6> row = design.x(t);
    if (wd == 7) {
      CHECK((row.array() == -1.0).all());
    } else {
      for (int k = 0; k < 6; ++k) CHECK(row(k) == (k == wd - 1 ? 1.0 : 0.0));
    }
  }
  // any 7 consecutive rows sum to the zero vector
  for (int t = 0; t + 7 <= design.days(); ++t) {
    Eigen::RowVector<double, 6> sum = Eigen::RowVector<double, 6>::Zero();
    for (int k = 0; k < 7; ++k) sum += design.x(t + k);
    CHECK(sum.cwiseAbs().maxCoeff() == 0.0);
  }
  // the report-day row is the onset-day row shifted by the delay
  for (int t = 0; t < w.length; ++t)
    for (int d = 0; d <= w.max_delay; ++d) CHECK((design.v(t, d) - design.x(t + d)).norm() == 0.0);
  // dot products agree with explicit row products
  Eigen::VectorXd coef(6);
  coef << 0.3, -0.1, 0.7, 0.2, -0.5, 0.05;
  CHECK(design.dot_x(3, coef) == doctest::Approx(design.x(3) * coef));
  CHECK(design.dot_v(3, 2, coef) == doctest::Approx(design.x(5) * coef));
}
