// NEON kernel variants (aarch64). The string kernels stay scalar here; the
// arithmetic ones are vectorized. NEON is mandatory on aarch64, so there is
// no runtime feature check beyond the architecture itself.

#include "cdxstats/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace cdxstats::kernels {

namespace {

std::uint64_t count_in_range_neon(const std::int32_t* v, std::size_t n,
                                  std::int32_t lo, std::int32_t hi) {
  std::uint64_t count = 0;
  std::size_t i = 0;
  int32x4_t vlo = vdupq_n_s32(lo);
  int32x4_t vhi = vdupq_n_s32(hi);
  uint32x4_t acc = vdupq_n_u32(0);
  for (; i + 4 <= n; i += 4) {
    int32x4_t x = vld1q_s32(v + i);
    uint32x4_t ge = vcgeq_s32(x, vlo);
    uint32x4_t lt = vcltq_s32(x, vhi);
    uint32x4_t in = vandq_u32(ge, lt);
    acc = vsubq_u32(acc, in);  // masks are all-ones; subtract == count
    if ((i & 0x3fff) == 0x3ffc) {  // drain before 32-bit lanes can wrap
      count += vaddlvq_u32(acc);
      acc = vdupq_n_u32(0);
    }
  }
  count += vaddlvq_u32(acc);
  for (; i < n; ++i) count += (v[i] >= lo && v[i] < hi) ? 1 : 0;
  return count;
}

std::int64_t sum_i32_neon(const std::int32_t* v, std::size_t n) {
  int64x2_t acc = vdupq_n_s64(0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    int32x4_t x = vld1q_s32(v + i);
    acc = vaddw_s32(acc, vget_low_s32(x));
    acc = vaddw_s32(acc, vget_high_s32(x));
  }
  std::int64_t sum = vaddvq_s64(acc);
  for (; i < n; ++i) sum += v[i];
  return sum;
}

std::int64_t sum_above_neon(const std::int32_t* v, std::size_t n,
                            std::int32_t threshold, std::uint64_t& count) {
  int64x2_t acc = vdupq_n_s64(0);
  std::uint64_t c = 0;
  std::size_t i = 0;
  int32x4_t thr = vdupq_n_s32(threshold);
  uint32x4_t cnt = vdupq_n_u32(0);
  for (; i + 4 <= n; i += 4) {
    int32x4_t x = vld1q_s32(v + i);
    uint32x4_t keep = vcgtq_s32(x, thr);
    int32x4_t masked = vandq_s32(x, vreinterpretq_s32_u32(keep));
    acc = vaddw_s32(acc, vget_low_s32(masked));
    acc = vaddw_s32(acc, vget_high_s32(masked));
    cnt = vsubq_u32(cnt, keep);
    if ((i & 0x3fff) == 0x3ffc) {
      c += vaddlvq_u32(cnt);
      cnt = vdupq_n_u32(0);
    }
  }
  c += vaddlvq_u32(cnt);
  std::int64_t sum = vaddvq_s64(acc);
  for (; i < n; ++i) {
    if (v[i] > threshold) {
      sum += v[i];
      ++c;
    }
  }
  count = c;
  return sum;
}

std::int64_t sum_i64_neon(const std::int64_t* v, std::size_t n) {
  int64x2_t acc = vdupq_n_s64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_s64(acc, vld1q_s64(v + i));
  std::int64_t sum = vaddvq_s64(acc);
  for (; i < n; ++i) sum += v[i];
  return sum;
}

}  // namespace

const Ops* neon_ops_impl() {
  static const Ops ops{
      "neon",
      scalar_ops().split_fields,
      scalar_ops().parse_digits,
      count_in_range_neon,
      sum_i32_neon,
      sum_above_neon,
      sum_i64_neon,
  };
  return &ops;
}

}  // namespace cdxstats::kernels

#else

namespace cdxstats::kernels {
const Ops* neon_ops_impl() { return nullptr; }
}  // namespace cdxstats::kernels

#endif
