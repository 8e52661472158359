#pragma once

#include <cstddef>
#include <cstdint>

namespace cdxstats::kernels {

// Byte range of one whitespace-separated token within a line.
struct FieldSpan {
  std::uint32_t off;
  std::uint32_t len;
};

// One set of inner-loop kernels. scalar_ops() is the reference
// implementation; the SIMD sets must be observationally identical to it
// (equivalence-tested in tests/test_kernels.cpp).
struct Ops {
  const char* name;

  // Splits `data` into whitespace-separated tokens (ASCII whitespace:
  // space, \t, \n, \v, \f, \r). Writes at most `max_out` spans, returns
  // the number written. Tokens past max_out are ignored.
  std::size_t (*split_fields)(const char* data, std::size_t len,
                              FieldSpan* out, std::size_t max_out);

  // Parses a run of exactly `len` decimal digits into `value`.
  // Returns false on any non-digit byte, len == 0, or u64 overflow.
  bool (*parse_digits)(const char* data, std::size_t len,
                       std::uint64_t& value);

  // Number of elements with lo <= v[i] < hi.
  std::uint64_t (*count_in_range)(const std::int32_t* v, std::size_t n,
                                  std::int32_t lo, std::int32_t hi);

  // Sum of all elements, widened to 64 bit.
  std::int64_t (*sum_i32)(const std::int32_t* v, std::size_t n);

  // Sum and count of elements strictly greater than `threshold`.
  std::int64_t (*sum_above)(const std::int32_t* v, std::size_t n,
                            std::int32_t threshold, std::uint64_t& count);

  std::int64_t (*sum_i64)(const std::int64_t* v, std::size_t n);
};

const Ops& scalar_ops();

// Null when the instruction set is not compiled in or the CPU lacks it.
const Ops* avx2_ops();
const Ops* neon_ops();

// Runtime-selected set: best available, overridable with the environment
// variable CDXSTATS_KERNELS=scalar|avx2|neon (silently falls back to the
// best available set if the requested one is unusable).
const Ops& active_ops();

}  // namespace cdxstats::kernels
