#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cdxstats/calendar.hpp"
#include "oracle.hpp"

using namespace cdxstats;

namespace {

Instant at(int y, int mo, int d, int h = 0, int mi = 0, int s = 0) {
  return to_instant({y, mo, d, h, mi, s});
}

}  // namespace

TEST_CASE("civil round trip") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Instant> dist(at(1990, 1, 1),
                                              at(2100, 12, 31, 23, 59, 59));
  for (int i = 0; i < 5000; ++i) {
    Instant t = dist(rng);
    CHECK(to_instant(to_civil(t)) == t);
  }
  Civil c = to_civil(at(2000, 2, 29, 13, 14, 15));
  CHECK(c.year == 2000);
  CHECK(c.month == 2);
  CHECK(c.day == 29);
  CHECK(c.hour == 13);
}

TEST_CASE("age_months examples") {
  CHECK(age_months(at(2000, 2, 1), at(2001, 1, 1)) == 11);
  CHECK(age_months(at(2000, 2, 1), at(2000, 2, 1)) == 0);
  CHECK(age_months(at(2001, 1, 15), at(2002, 1, 1)) == 11);
  CHECK(age_months(at(2000, 3, 1), at(2000, 11, 1)) == 8);
  CHECK(age_months(at(2000, 2, 1), at(2001, 2, 1)) == 12);
  // time of day breaks the tie
  CHECK(age_months(at(2000, 2, 1, 10, 30), at(2001, 2, 1, 10, 29)) == 11);
  CHECK(age_months(at(2000, 2, 1, 10, 30), at(2001, 2, 1, 10, 30)) == 12);
  CHECK_THROWS_AS(age_months(at(2001, 1, 1), at(2000, 1, 1)),
                  std::invalid_argument);
}

TEST_CASE("age_months equals the chrono enumeration oracle") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<Instant> dist(at(1990, 1, 1),
                                              at(2060, 12, 31));
  for (int i = 0; i < 20000; ++i) {
    Instant a = dist(rng);
    Instant b = dist(rng);
    if (a > b) std::swap(a, b);
    CHECK(age_months(a, b) == oracle::months_between(a, b));
  }
}

TEST_CASE("add_years clamps leap days") {
  CHECK(add_years(at(2000, 2, 29, 8), 1) == at(2001, 2, 28, 8));
  CHECK(add_years(at(2000, 2, 29), 4) == at(2004, 2, 29));
  CHECK(add_years(at(1999, 7, 4, 12), 3) == at(2002, 7, 4, 12));
}

TEST_CASE("anniversary is the exact month-arithmetic boundary") {
  // the paper's anchor example: a domain first seen 04.05.2000 10:30:45 has
  // age 0 through 04.05.2001 10:30:44
  Instant origin = at(2000, 5, 4, 10, 30, 45);
  CHECK(anniversary(origin, 1) == at(2001, 5, 4, 10, 30, 45));
  CHECK(age_months(origin, anniversary(origin, 1) - 1) == 11);

  // a Feb 29 origin rolls to Mar 1 rather than landing before instants
  // that still belong to the previous period
  Instant leap = at(2000, 2, 29, 8);
  CHECK(anniversary(leap, 1) == at(2001, 3, 1));
  CHECK(anniversary(leap, 4) == at(2004, 2, 29, 8));

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Instant> dist(at(1996, 1, 1),
                                              at(2010, 12, 31));
  for (int i = 0; i < 4000; ++i) {
    Instant b = dist(rng);
    int k = static_cast<int>(rng() % 10);
    Instant t = anniversary(b, k);
    CHECK(year_index(b, t) == k);
    if (k > 0) CHECK(year_index(b, t - 1) == k - 1);
  }
  // leap-day origins specifically
  for (int i = 0; i < 200; ++i) {
    Instant b = at(i % 2 == 0 ? 1996 : 2000, 2, 29,
                   static_cast<int>(rng() % 24));
    int k = 1 + static_cast<int>(rng() % 9);
    Instant t = anniversary(b, k);
    CHECK(year_index(b, t) == k);
    CHECK(year_index(b, t - 1) == k - 1);
  }
}

TEST_CASE("add_months") {
  CHECK(add_months(at(2000, 11, 15), 3) == at(2001, 2, 15));
  CHECK(add_months(at(2000, 1, 31), 1) == at(2000, 2, 29));
  CHECK(add_months(at(2001, 1, 31), 1) == at(2001, 2, 28));
  CHECK(add_months(at(2000, 3, 1), 8) == at(2000, 11, 1));
}

TEST_CASE("timestamp parsing") {
  auto ts = [](const char* s) { return parse_timestamp14(s); };

  CHECK(ts("20000201000000") == at(2000, 2, 1));
  CHECK(ts("19961231235959") == at(1996, 12, 31, 23, 59, 59));

  SUBCASE("truncated forms pad to the earliest legal value") {
    CHECK(ts("2000") == at(2000, 1, 1));
    CHECK(ts("200003") == at(2000, 3, 1));
    CHECK(ts("20000315") == at(2000, 3, 15));
    CHECK(ts("2000031512") == at(2000, 3, 15, 12));
    CHECK(ts("200003151234") == at(2000, 3, 15, 12, 34));
    // half-given components complete to the earliest legal digit
    CHECK(ts("20001") == at(2000, 10, 1));
    CHECK(ts("20000") == at(2000, 1, 1));
    CHECK(ts("2000032") == at(2000, 3, 20));
  }

  SUBCASE("rejects") {
    CHECK(!ts("200"));            // too short
    CHECK(!ts(""));
    CHECK(!ts("2000AB01"));       // non-digit
    CHECK(!ts("198912310000"));   // before 1990
    CHECK(!ts("21010101000000")); // after 2100
    CHECK(!ts("20001301000000")); // month 13
    CHECK(!ts("20000230000000")); // Feb 30
    CHECK(!ts("20010229000000")); // Feb 29 in a non-leap year
    CHECK(!ts("20000101240000")); // hour 24
    CHECK(!ts("200001010000000")); // 15 digits
  }

  CHECK(ts("20000229000000") == at(2000, 2, 29));
}

TEST_CASE("timestamp format round trip") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Instant> dist(at(1990, 1, 1),
                                              at(2100, 12, 31));
  for (int i = 0; i < 5000; ++i) {
    Instant t = dist(rng);
    auto parsed = parse_timestamp14(format_timestamp14(t));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == t);
  }
}

TEST_CASE("year helpers") {
  CHECK(year_of(at(2003, 12, 31, 23, 59, 59)) == 2003);
  CHECK(year_of(at(2004, 1, 1)) == 2004);
  CHECK(year_start(2000) == at(2000, 1, 1));
  CHECK(days_in_month(2000, 2) == 29);
  CHECK(days_in_month(1900, 2) == 28);
  CHECK(days_in_month(2000, 4) == 30);
}
