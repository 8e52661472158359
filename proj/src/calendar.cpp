#include "cdxstats/calendar.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

#include "cdxstats/kernels.hpp"

namespace cdxstats {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);  // [0, 399]
  const unsigned doy =
      (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
      static_cast<unsigned>(d) - 1;                       // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;  // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[static_cast<std::size_t>(month - 1)];
}

Instant to_instant(const Civil& c) {
  return days_from_civil(c.year, c.month, c.day) * kSecondsPerDay +
         c.hour * 3600 + c.minute * 60 + c.second;
}

Civil to_civil(Instant t) {
  std::int64_t days = t / kSecondsPerDay;
  std::int64_t rem = t % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    days -= 1;
  }
  Civil c;
  civil_from_days(days, c.year, c.month, c.day);
  c.hour = static_cast<int>(rem / 3600);
  c.minute = static_cast<int>((rem % 3600) / 60);
  c.second = static_cast<int>(rem % 60);
  return c;
}

int year_of(Instant t) { return to_civil(t).year; }

Instant year_start(int year) { return to_instant({year, 1, 1, 0, 0, 0}); }

Instant add_years(Instant t, int years) {
  Civil c = to_civil(t);
  c.year += years;
  int dim = days_in_month(c.year, c.month);
  if (c.day > dim) c.day = dim;
  return to_instant(c);
}

Instant add_months(Instant t, int months) {
  Civil c = to_civil(t);
  int total = c.year * 12 + (c.month - 1) + months;
  int y = total / 12;
  int rem = total % 12;
  if (rem < 0) {
    y -= 1;
    rem += 12;
  }
  c.year = y;
  c.month = rem + 1;
  int dim = days_in_month(c.year, c.month);
  if (c.day > dim) c.day = dim;
  return to_instant(c);
}

Instant anniversary(Instant origin, int years) {
  Civil c = to_civil(origin);
  c.year += years;
  if (c.day > days_in_month(c.year, c.month)) {
    c.day = 1;
    c.hour = c.minute = c.second = 0;
    c.month += 1;
    if (c.month > 12) {
      c.month = 1;
      c.year += 1;
    }
  }
  return to_instant(c);
}

int age_months(Instant birth, Instant at) {
  if (at < birth) throw std::invalid_argument("age_months: at < birth");
  Civil b = to_civil(birth);
  Civil a = to_civil(at);
  int months = 12 * (a.year - b.year) + (a.month - b.month);
  long a_sub = ((static_cast<long>(a.day) * 24 + a.hour) * 60 + a.minute) *
                   60 + a.second;
  long b_sub = ((static_cast<long>(b.day) * 24 + b.hour) * 60 + b.minute) *
                   60 + b.second;
  if (a_sub < b_sub) months -= 1;
  return months;
}

int year_index(Instant origin, Instant t) {
  return age_months(origin, t) / 12;
}

std::optional<Instant> parse_timestamp14(std::string_view digits) {
  const std::size_t len = digits.size();
  if (len < 4 || len > 14) return std::nullopt;

  std::uint64_t value = 0;
  if (!kernels::active_ops().parse_digits(digits.data(), len, value))
    return std::nullopt;

  Civil c;
  if (len == 14) {
    std::uint64_t v = value;
    c.second = static_cast<int>(v % 100), v /= 100;
    c.minute = static_cast<int>(v % 100), v /= 100;
    c.hour = static_cast<int>(v % 100), v /= 100;
    c.day = static_cast<int>(v % 100), v /= 100;
    c.month = static_cast<int>(v % 100), v /= 100;
    c.year = static_cast<int>(v);
  } else {
    // Component-wise decode with earliest-legal completion of a half-given
    // component: month/day pad to the smallest legal two-digit value, time
    // components pad with zero.
    auto component = [&](std::size_t off, int pad_lowest_one) -> int {
      if (off + 2 <= len)
        return (digits[off] - '0') * 10 + (digits[off + 1] - '0');
      if (off < len) {
        int d = digits[off] - '0';
        return d * 10 + (d == 0 ? pad_lowest_one : 0);
      }
      return pad_lowest_one;
    };
    c.year = (digits[0] - '0') * 1000 + (digits[1] - '0') * 100 +
             (digits[2] - '0') * 10 + (digits[3] - '0');
    c.month = component(4, 1);
    c.day = component(6, 1);
    c.hour = component(8, 0);
    c.minute = component(10, 0);
    c.second = component(12, 0);
  }

  if (c.year < 1990 || c.year > 2100) return std::nullopt;
  if (c.month < 1 || c.month > 12) return std::nullopt;
  if (c.day < 1 || c.day > days_in_month(c.year, c.month)) return std::nullopt;
  if (c.hour > 23 || c.minute > 59 || c.second > 59) return std::nullopt;
  return to_instant(c);
}

std::string format_timestamp14(Instant t) {
  Civil c = to_civil(t);
  char buf[15];
  std::snprintf(buf, sizeof(buf), "%04d%02d%02d%02d%02d%02d", c.year, c.month,
                c.day, c.hour, c.minute, c.second);
  return std::string(buf, 14);
}

}  // namespace cdxstats
