#pragma once

#include <string>
#include <vector>

namespace nowcast {

// Minimal CSV support for the fixed file formats used here: comma separated,
// no quoting (fields never contain commas), first row is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws InputError when missing.
  int column(const std::string& name) const;
};

CsvTable read_csv_file(const std::string& path);

// Validates that `table` has exactly the expected header (order-sensitive).
void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

long long parse_int(const std::string& s, const std::string& context);
double parse_real(const std::string& s, const std::string& context);

// Fixed-format float used in all CSV output so reruns are byte-identical.
std::string format_real(double x);

}  // namespace nowcast
