// AVX2 kernel variants. This translation unit is compiled with -mavx2 and
// must only be entered after a runtime cpuid check (see dispatch.cpp).

#include "cdxstats/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstring>

namespace cdxstats::kernels {

namespace {

inline std::uint32_t ws_mask32(__m256i chunk) {
  __m256i m = _mm256_cmpeq_epi8(chunk, _mm256_set1_epi8(' '));
  m = _mm256_or_si256(m, _mm256_cmpeq_epi8(chunk, _mm256_set1_epi8('\t')));
  m = _mm256_or_si256(m, _mm256_cmpeq_epi8(chunk, _mm256_set1_epi8('\n')));
  m = _mm256_or_si256(m, _mm256_cmpeq_epi8(chunk, _mm256_set1_epi8('\v')));
  m = _mm256_or_si256(m, _mm256_cmpeq_epi8(chunk, _mm256_set1_epi8('\f')));
  m = _mm256_or_si256(m, _mm256_cmpeq_epi8(chunk, _mm256_set1_epi8('\r')));
  return static_cast<std::uint32_t>(_mm256_movemask_epi8(m));
}

inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' ||
         c == '\r';
}

std::size_t split_fields_avx2(const char* data, std::size_t len,
                              FieldSpan* out, std::size_t max_out) {
  std::size_t n = 0;
  std::size_t i = 0;
  bool in_tok = false;
  std::size_t start = 0;

  while (i + 32 <= len && n < max_out) {
    __m256i chunk =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    std::uint32_t ws = ws_mask32(chunk);
    std::uint32_t tok = ~ws;
    unsigned c = 0;
    while (n < max_out) {
      if (!in_tok) {
        if (c >= 32) break;
        std::uint32_t t = tok >> c;
        if (t == 0) break;
        c += static_cast<unsigned>(__builtin_ctz(t));
        start = i + c;
        in_tok = true;
      }
      if (c >= 32) break;
      std::uint32_t w = ws >> c;
      if (w == 0) break;  // token runs to the chunk edge
      c += static_cast<unsigned>(__builtin_ctz(w));
      out[n].off = static_cast<std::uint32_t>(start);
      out[n].len = static_cast<std::uint32_t>(i + c - start);
      ++n;
      in_tok = false;
    }
    i += 32;
  }

  // tail (and any token still open at the last chunk edge)
  while (i < len && n < max_out) {
    if (!in_tok) {
      if (is_ws(data[i])) {
        ++i;
        continue;
      }
      start = i;
      in_tok = true;
    } else if (is_ws(data[i])) {
      out[n].off = static_cast<std::uint32_t>(start);
      out[n].len = static_cast<std::uint32_t>(i - start);
      ++n;
      in_tok = false;
    } else {
      ++i;
      continue;
    }
    if (in_tok) ++i;
  }
  if (in_tok && n < max_out) {
    out[n].off = static_cast<std::uint32_t>(start);
    out[n].len = static_cast<std::uint32_t>(len - start);
    ++n;
  }
  return n;
}

// 16-digit SSE parse: right-aligned into a '0'-padded 16-byte lane, then the
// classic maddubs/madd reduction to two 8-digit halves.
bool parse_digits16(const char* data, std::size_t len, std::uint64_t& value) {
  char buf[16];
  std::memset(buf, '0', 8);
  std::memset(buf + 8, '0', 8);
  std::memcpy(buf + (16 - len), data, len);

  __m128i bytes = _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf));
  __m128i digits = _mm_sub_epi8(bytes, _mm_set1_epi8('0'));
  // unsigned compare digits <= 9 via saturating subtract
  __m128i over = _mm_subs_epu8(digits, _mm_set1_epi8(9));
  if (_mm_movemask_epi8(_mm_cmpeq_epi8(over, _mm_setzero_si128())) != 0xffff)
    return false;

  __m128i pairs = _mm_maddubs_epi16(digits, _mm_set1_epi16(0x010a));  // 10,1
  __m128i quads = _mm_madd_epi16(pairs, _mm_set1_epi32(0x00010064));  // 100,1
  __m128i packed = _mm_packus_epi32(quads, quads);
  __m128i halves =
      _mm_madd_epi16(packed, _mm_set1_epi32(0x00012710));  // 10000,1
  std::uint64_t hi = static_cast<std::uint32_t>(_mm_cvtsi128_si32(halves));
  std::uint64_t lo = static_cast<std::uint32_t>(
      _mm_extract_epi32(halves, 1));
  value = hi * 100000000ull + lo;
  return true;
}

bool parse_digits_avx2(const char* data, std::size_t len,
                       std::uint64_t& value) {
  if (len == 0) return false;
  if (len <= 16) return parse_digits16(data, len, value);
  return scalar_ops().parse_digits(data, len, value);
}

std::uint64_t count_in_range_avx2(const std::int32_t* v, std::size_t n,
                                  std::int32_t lo, std::int32_t hi) {
  std::uint64_t count = 0;
  std::size_t i = 0;
  __m256i vlo = _mm256_set1_epi32(lo);
  __m256i vhi = _mm256_set1_epi32(hi);
  for (; i + 8 <= n; i += 8) {
    __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i));
    __m256i below = _mm256_cmpgt_epi32(vlo, x);   // x < lo
    __m256i lt_hi = _mm256_cmpgt_epi32(vhi, x);   // x < hi
    __m256i in = _mm256_andnot_si256(below, lt_hi);
    count += static_cast<unsigned>(
        __builtin_popcount(_mm256_movemask_ps(_mm256_castsi256_ps(in))));
  }
  for (; i < n; ++i) count += (v[i] >= lo && v[i] < hi) ? 1 : 0;
  return count;
}

inline std::int64_t hsum_epi64(__m256i acc) {
  __m128i lo = _mm256_castsi256_si128(acc);
  __m128i hi = _mm256_extracti128_si256(acc, 1);
  __m128i s = _mm_add_epi64(lo, hi);
  return _mm_cvtsi128_si64(s) + _mm_extract_epi64(s, 1);
}

std::int64_t sum_i32_avx2(const std::int32_t* v, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i));
    acc = _mm256_add_epi64(acc,
                           _mm256_cvtepi32_epi64(_mm256_castsi256_si128(x)));
    acc = _mm256_add_epi64(
        acc, _mm256_cvtepi32_epi64(_mm256_extracti128_si256(x, 1)));
  }
  std::int64_t sum = hsum_epi64(acc);
  for (; i < n; ++i) sum += v[i];
  return sum;
}

std::int64_t sum_above_avx2(const std::int32_t* v, std::size_t n,
                            std::int32_t threshold, std::uint64_t& count) {
  __m256i acc = _mm256_setzero_si256();
  std::uint64_t c = 0;
  std::size_t i = 0;
  __m256i thr = _mm256_set1_epi32(threshold);
  for (; i + 8 <= n; i += 8) {
    __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i));
    __m256i keep = _mm256_cmpgt_epi32(x, thr);
    __m256i masked = _mm256_and_si256(x, keep);
    acc = _mm256_add_epi64(
        acc, _mm256_cvtepi32_epi64(_mm256_castsi256_si128(masked)));
    acc = _mm256_add_epi64(
        acc, _mm256_cvtepi32_epi64(_mm256_extracti128_si256(masked, 1)));
    c += static_cast<unsigned>(
        __builtin_popcount(_mm256_movemask_ps(_mm256_castsi256_ps(keep))));
  }
  std::int64_t sum = hsum_epi64(acc);
  for (; i < n; ++i) {
    if (v[i] > threshold) {
      sum += v[i];
      ++c;
    }
  }
  count = c;
  return sum;
}

std::int64_t sum_i64_avx2(const std::int64_t* v, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_epi64(
        acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i)));
  }
  std::int64_t sum = hsum_epi64(acc);
  for (; i < n; ++i) sum += v[i];
  return sum;
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops ops{
      "avx2",          split_fields_avx2, parse_digits_avx2,
      count_in_range_avx2, sum_i32_avx2,  sum_above_avx2,
      sum_i64_avx2,
  };
  return &ops;
}

}  // namespace cdxstats::kernels

#else

namespace cdxstats::kernels {
const Ops* avx2_ops_impl() { return nullptr; }
}  // namespace cdxstats::kernels

#endif
