#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cdxstats {

// UTC instant, seconds since the Unix epoch. CDX timestamps carry no zone;
// everything in this project is UTC.
using Instant = std::int64_t;

struct Civil {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);

Instant to_instant(const Civil& c);
Civil to_civil(Instant t);

int year_of(Instant t);
Instant year_start(int year);  // Jan 1, 00:00:00

// Civil year shift; Feb 29 clamps to Feb 28 in non-leap target years.
Instant add_years(Instant t, int years);
// Civil month shift with day clamping.
Instant add_months(Instant t, int months);

// The first instant whose age_months(origin, t) reaches 12 * years: the
// civil anniversary, except that a Feb 29 origin rolls to Mar 1 00:00:00 in
// non-leap years. Using this as the period boundary keeps instant
// comparisons and month arithmetic interchangeable.
Instant anniversary(Instant origin, int years);

// Whole calendar months elapsed between birth and at (at >= birth):
// 12*yearDelta + monthDelta, minus one when the (day, time-of-day) of `at`
// precedes that of `birth`. Throws std::invalid_argument when at < birth.
int age_months(Instant birth, Instant at);

// floor(age_months / 12): the one-year period index of `t` relative to
// `origin`. Used for anniversary-based period membership so that day-clamped
// anniversaries can never disagree with the month arithmetic.
int year_index(Instant origin, Instant t);

// 14-digit CDX timestamp `YYYYMMDDHHMMSS`. Truncated inputs of length >= 4
// are accepted and right-padded with the earliest legal value (month/day 01,
// time 00:00:00); a half-given component is completed to its earliest legal
// digit. Years outside [1990, 2100] and invalid calendar fields are
// rejected.
std::optional<Instant> parse_timestamp14(std::string_view digits);
std::string format_timestamp14(Instant t);

}  // namespace cdxstats
