#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "cdxstats/kernels.hpp"

using namespace cdxstats::kernels;

namespace {

std::vector<std::pair<std::uint32_t, std::uint32_t>> tokens(
    const Ops& ops, const std::string& s, std::size_t max_out = 64) {
  std::vector<FieldSpan> spans(max_out);
  std::size_t n = ops.split_fields(s.data(), s.size(), spans.data(), max_out);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(spans[i].off, spans[i].len);
  return out;
}

std::vector<const Ops*> all_ops() {
  std::vector<const Ops*> ops{&scalar_ops()};
  if (avx2_ops() != nullptr) ops.push_back(avx2_ops());
  if (neon_ops() != nullptr) ops.push_back(neon_ops());
  return ops;
}

}  // namespace

TEST_CASE("split_fields basics") {
  for (const Ops* ops : all_ops()) {
    CAPTURE(ops->name);
    CHECK(tokens(*ops, "a b c") ==
          decltype(tokens(*ops, ""))({{0, 1}, {2, 1}, {4, 1}}));
    CHECK(tokens(*ops, "  hello\t\tworld  ") ==
          decltype(tokens(*ops, ""))({{2, 5}, {9, 5}}));
    CHECK(tokens(*ops, "").empty());
    CHECK(tokens(*ops, " \t \r ").empty());
    CHECK(tokens(*ops, "single") ==
          decltype(tokens(*ops, ""))({{0, 6}}));
    // max_out truncation
    CHECK(tokens(*ops, "a b c d e", 2).size() == 2);
  }
}

TEST_CASE("split_fields equivalence on random lines") {
  std::mt19937_64 rng(11);
  const char alphabet[] = " \t\nabcdefg./:-)";
  for (int iter = 0; iter < 3000; ++iter) {
    std::size_t len = rng() % 150;
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
      s += alphabet[rng() % (sizeof(alphabet) - 1)];
    std::size_t max_out = 1 + rng() % 16;
    auto expected = tokens(scalar_ops(), s, max_out);
    for (const Ops* ops : all_ops()) {
      CAPTURE(ops->name);
      CAPTURE(s);
      CHECK(tokens(*ops, s, max_out) == expected);
    }
  }
  // tokens spanning the 32-byte chunk boundary
  std::string long_token(100, 'x');
  for (const Ops* ops : all_ops()) {
    auto t = tokens(*ops, "  " + long_token + " y");
    REQUIRE(t.size() == 2);
    CHECK(t[0] == std::make_pair(std::uint32_t{2}, std::uint32_t{100}));
  }
}

TEST_CASE("parse_digits") {
  for (const Ops* ops : all_ops()) {
    CAPTURE(ops->name);
    std::uint64_t v = 0;
    CHECK(ops->parse_digits("20000201000000", 14, v));
    CHECK(v == 20000201000000ull);
    CHECK(ops->parse_digits("0", 1, v));
    CHECK(v == 0);
    CHECK(ops->parse_digits("9999999999999999", 16, v));
    CHECK(v == 9999999999999999ull);
    CHECK(ops->parse_digits("18446744073709551615", 20, v));  // UINT64_MAX
    CHECK(v == UINT64_MAX);
    CHECK(!ops->parse_digits("18446744073709551616", 20, v));  // overflow
    CHECK(!ops->parse_digits("", 0, v));
    CHECK(!ops->parse_digits("12a4", 4, v));
    CHECK(!ops->parse_digits("-123", 4, v));
    CHECK(!ops->parse_digits("1 2", 3, v));
  }
}

TEST_CASE("parse_digits equivalence on random digit strings") {
  std::mt19937_64 rng(12);
  for (int iter = 0; iter < 5000; ++iter) {
    std::size_t len = 1 + rng() % 20;
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
      if (rng() % 40 == 0) s += char('a' + rng() % 3);
      else s += char('0' + rng() % 10);
    }
    std::uint64_t expect = 0, got = 0;
    bool expect_ok = scalar_ops().parse_digits(s.data(), s.size(), expect);
    for (const Ops* ops : all_ops()) {
      CAPTURE(ops->name);
      CAPTURE(s);
      bool ok = ops->parse_digits(s.data(), s.size(), got);
      CHECK(ok == expect_ok);
      if (ok) CHECK(got == expect);
    }
  }
}

TEST_CASE("arithmetic kernels equivalence") {
  std::mt19937_64 rng(13);
  for (int iter = 0; iter < 500; ++iter) {
    std::size_t n = rng() % 300;
    std::vector<std::int32_t> v(n);
    for (auto& x : v)
      x = static_cast<std::int32_t>(rng() % 2000) - 100;
    std::int32_t lo = static_cast<std::int32_t>(rng() % 100) - 50;
    std::int32_t hi = lo + static_cast<std::int32_t>(rng() % 200);
    std::int32_t thr = static_cast<std::int32_t>(rng() % 120);

    std::uint64_t c_ref = 0, c = 0;
    auto ref_sum_above = scalar_ops().sum_above(v.data(), n, thr, c_ref);
    auto ref_count = scalar_ops().count_in_range(v.data(), n, lo, hi);
    auto ref_sum = scalar_ops().sum_i32(v.data(), n);

    std::vector<std::int64_t> w(n);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = static_cast<std::int64_t>(rng()) % 1000000;
    auto ref_sum64 = scalar_ops().sum_i64(w.data(), n);

    for (const Ops* ops : all_ops()) {
      CAPTURE(ops->name);
      CHECK(ops->count_in_range(v.data(), n, lo, hi) == ref_count);
      CHECK(ops->sum_i32(v.data(), n) == ref_sum);
      CHECK(ops->sum_above(v.data(), n, thr, c) == ref_sum_above);
      CHECK(c == c_ref);
      CHECK(ops->sum_i64(w.data(), n) == ref_sum64);
    }
  }
}

TEST_CASE("runtime dispatch returns a working set") {
  const Ops& ops = active_ops();
  std::uint64_t v = 0;
  CHECK(ops.parse_digits("42", 2, v));
  CHECK(v == 42);
  INFO("active kernel set: ", ops.name);
  std::vector<std::int32_t> ages{5, 12, 23, 61, 200};
  CHECK(ops.count_in_range(ages.data(), ages.size(), 12, 24) == 2);
  std::uint64_t count = 0;
  CHECK(ops.sum_above(ages.data(), ages.size(), 60, count) == 261);
  CHECK(count == 2);
}
