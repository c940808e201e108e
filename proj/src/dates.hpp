#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace nowcast {

// Calendar dates are plain day counts; all I/O uses ISO-8601 (YYYY-MM-DD).
using Date = std::chrono::sys_days;

// Throws InputError on malformed or impossible dates.
Date parse_date(std::string_view text);

std::string format_date(Date date);

// ISO weekday, Monday = 1 .. Sunday = 7.
int iso_weekday(Date date);

inline Date add_days(Date date, int days) {
  return date + std::chrono::days{days};
}

}  // namespace nowcast
