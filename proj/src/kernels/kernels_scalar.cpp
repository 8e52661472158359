#include "cdxstats/kernels.hpp"

namespace cdxstats::kernels {

namespace {

inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' ||
         c == '\r';
}

std::size_t split_fields_scalar(const char* data, std::size_t len,
                                FieldSpan* out, std::size_t max_out) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < len && n < max_out) {
    while (i < len && is_ws(data[i])) ++i;
    if (i >= len) break;
    std::size_t start = i;
    while (i < len && !is_ws(data[i])) ++i;
    out[n].off = static_cast<std::uint32_t>(start);
    out[n].len = static_cast<std::uint32_t>(i - start);
    ++n;
  }
  return n;
}

bool parse_digits_scalar(const char* data, std::size_t len,
                         std::uint64_t& value) {
  if (len == 0) return false;
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < len; ++i) {
    unsigned d = static_cast<unsigned char>(data[i]) - '0';
    if (d > 9) return false;
    if (v > (UINT64_MAX - d) / 10) return false;
    v = v * 10 + d;
  }
  value = v;
  return true;
}

std::uint64_t count_in_range_scalar(const std::int32_t* v, std::size_t n,
                                    std::int32_t lo, std::int32_t hi) {
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    count += (v[i] >= lo && v[i] < hi) ? 1 : 0;
  }
  return count;
}

std::int64_t sum_i32_scalar(const std::int32_t* v, std::size_t n) {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += v[i];
  return sum;
}

std::int64_t sum_above_scalar(const std::int32_t* v, std::size_t n,
                              std::int32_t threshold, std::uint64_t& count) {
  std::int64_t sum = 0;
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] > threshold) {
      sum += v[i];
      ++c;
    }
  }
  count = c;
  return sum;
}

std::int64_t sum_i64_scalar(const std::int64_t* v, std::size_t n) {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += v[i];
  return sum;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{
      "scalar",          split_fields_scalar, parse_digits_scalar,
      count_in_range_scalar, sum_i32_scalar,  sum_above_scalar,
      sum_i64_scalar,
  };
  return ops;
}

}  // namespace cdxstats::kernels
