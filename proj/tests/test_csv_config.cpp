#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "csv.hpp"
#include "errors.hpp"

using namespace nowcast;

namespace {
std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  return path;
}
}  // namespace

TEST_CASE("csv lines split on commas, fields kept verbatim") {
  auto f = split_csv_line("a,b c,,d");
  REQUIRE(f.size() == 4);
  CHECK(f[0] == "a");
  CHECK(f[1] == "b c");
  CHECK(f[2] == "");
  CHECK(f[3] == "d");
  CHECK(split_csv_line("").size() == 1);
  CHECK(split_csv_line(",").size() == 2);
}

TEST_CASE("csv files parse with header and ragged rows rejected") {
  auto path = write_temp("nc_test_table.csv", "a,b\n1,2\n3,4\n");
  CsvTable t = read_csv_file(path.string());
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][1] == "4");
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), InputError);
  CHECK_NOTHROW(require_header(t, {"a", "b"}, "x"));
  CHECK_THROWS_AS(require_header(t, {"a", "c"}, "x"), InputError);
  CHECK_THROWS_AS(require_header(t, {"a"}, "x"), InputError);

  auto ragged = write_temp("nc_test_ragged.csv", "a,b\n1\n");
  CHECK_THROWS_AS(read_csv_file(ragged.string()), InputError);
  CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), InputError);
  std::remove(path.c_str());
  std::remove(ragged.c_str());
}

TEST_CASE("scalar parsing is strict") {
  CHECK(parse_int("42", "x") == 42);
  CHECK(parse_int("-3", "x") == -3);
  CHECK_THROWS_AS(parse_int("4.5", "x"), InputError);
  CHECK_THROWS_AS(parse_int("", "x"), InputError);
  CHECK_THROWS_AS(parse_int("12a", "x"), InputError);
  CHECK(parse_real("2.5e3", "x") == doctest::Approx(2500.0));
  CHECK_THROWS_AS(parse_real("zzz", "x"), InputError);
  CHECK_THROWS_AS(parse_real("1.5x", "x"), InputError);
}

TEST_CASE("real formatting is stable and readable") {
  CHECK(format_real(0.0) == "0");
  CHECK(format_real(2.0) == "2");
  CHECK(format_real(0.5) == "0.5");
  // round trip at the printed precision
  double v = 0.12345678901234;
  CHECK(parse_real(format_real(v), "x") == doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("config files parse, override, and hash deterministically") {
  auto path = write_temp("nc_test_conf.txt",
                         "# comment line\n"
                         "as_of = 2021-03-01\n"
                         "iterations=500\n"
                         "\n"
                         "weights = 0.5, 1.5,2\n"
                         "flag = true\n");
  KeyValueConfig cfg = KeyValueConfig::from_file(path.string());
  CHECK(cfg.get_string("as_of") == "2021-03-01");
  CHECK(cfg.get_int("iterations", 0) == 500);
  CHECK(cfg.require_int("iterations") == 500);
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_real("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(cfg.get_string("missing"), InputError);
  CHECK_THROWS_AS(cfg.require_int("missing"), InputError);
  auto w = cfg.get_real_list("weights");
  REQUIRE(w.size() == 3);
  CHECK(w[1] == doctest::Approx(1.5));

  // canonical text sorts keys, so insertion order cannot matter
  KeyValueConfig a, b;
  a.set("x", "1");
  a.set("y", "2");
  b.set("y", "2");
  b.set("x", "1");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.hash() == b.hash());
  b.set("x", "3");
  CHECK(a.hash() != b.hash());

  // overriding replaces
  a.set("x", "9");
  CHECK(a.get_string("x") == "9");
  std::remove(path.c_str());
}

TEST_CASE("config rejects malformed lines") {
  auto path = write_temp("nc_test_badconf.txt", "no_equals_here\n");
  CHECK_THROWS_AS(KeyValueConfig::from_file(path.string()), InputError);
  std::remove(path.c_str());
}
