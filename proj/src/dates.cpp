#include "dates.hpp"

#include <charconv>
#include <cstdio>

#include "errors.hpp"

namespace nowcast {

namespace {

int parse_int_field(std::string_view s, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InputError("invalid date: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw InputError("invalid date: '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  const int y = parse_int_field(text.substr(0, 4), text);
  const int m = parse_int_field(text.substr(5, 2), text);
  const int d = parse_int_field(text.substr(8, 2), text);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) {
    throw InputError("invalid date: '" + std::string(text) + "'");
  }
  return std::chrono::sys_days{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

int iso_weekday(Date date) {
  return int(std::chrono::weekday{date}.iso_encoding());
}

}  // namespace nowcast
