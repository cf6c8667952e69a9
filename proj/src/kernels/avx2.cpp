// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "crr/kernels.hpp"

namespace crr::kernels {

namespace {

inline std::uint64_t hsum_epi64(__m256i v) {
  const __m128i lo = _mm256_castsi256_si128(v);
  const __m128i hi = _mm256_extracti128_si256(v, 1);
  const __m128i s = _mm_add_epi64(lo, hi);
  return static_cast<std::uint64_t>(_mm_cvtsi128_si64(s)) +
         static_cast<std::uint64_t>(_mm_extract_epi64(s, 1));
}

CellTally tally_avx2(const std::uint8_t* d, const std::uint8_t* y, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc_d = zero;
  __m256i acc_y = zero;
  __m256i acc_dy = zero;

  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i vd = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(d + i));
    const __m256i vy = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y + i));
    // sad against zero sums each 8-byte group into a 64-bit lane.
    acc_d = _mm256_add_epi64(acc_d, _mm256_sad_epu8(vd, zero));
    acc_y = _mm256_add_epi64(acc_y, _mm256_sad_epu8(vy, zero));
    acc_dy = _mm256_add_epi64(acc_dy, _mm256_sad_epu8(_mm256_and_si256(vd, vy), zero));
  }

  CellTally t;
  t.total = n;
  t.minority = hsum_epi64(acc_d);
  t.force = hsum_epi64(acc_y);
  t.minority_force = hsum_epi64(acc_dy);
  for (; i < n; ++i) {
    t.minority += d[i];
    t.force += y[i];
    t.minority_force += d[i] & y[i];
  }
  return t;
}

inline __m256i load8_u8_as_epi32(const std::uint8_t* p) {
  return _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(p)));
}

// Widen eight u32 lanes to u64 and add into acc.
inline __m256i add_widened(__m256i acc, __m256i v32) {
  const __m256i lo = _mm256_cvtepu32_epi64(_mm256_castsi256_si128(v32));
  const __m256i hi = _mm256_cvtepu32_epi64(_mm256_extracti128_si256(v32, 1));
  return _mm256_add_epi64(acc, _mm256_add_epi64(lo, hi));
}

CellTally tally_weighted_avx2(const std::uint32_t* counts, const std::uint8_t* d,
                              const std::uint8_t* y, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc_c = zero;
  __m256i acc_d = zero;
  __m256i acc_y = zero;
  __m256i acc_dy = zero;

  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i c = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(counts + i));
    // 0/1 flags become 0 / all-ones masks.
    const __m256i md = _mm256_sub_epi32(zero, load8_u8_as_epi32(d + i));
    const __m256i my = _mm256_sub_epi32(zero, load8_u8_as_epi32(y + i));
    const __m256i cd = _mm256_and_si256(c, md);
    acc_c = add_widened(acc_c, c);
    acc_d = add_widened(acc_d, cd);
    acc_y = add_widened(acc_y, _mm256_and_si256(c, my));
    acc_dy = add_widened(acc_dy, _mm256_and_si256(cd, my));
  }

  CellTally t;
  t.total = hsum_epi64(acc_c);
  t.minority = hsum_epi64(acc_d);
  t.force = hsum_epi64(acc_y);
  t.minority_force = hsum_epi64(acc_dy);
  for (; i < n; ++i) {
    const std::uint64_t c = counts[i];
    t.total += c;
    t.minority += c * d[i];
    t.force += c * y[i];
    t.minority_force += c * (d[i] & y[i]);
  }
  return t;
}

WeightedShare weighted_share_avx2(const double* w, const std::uint8_t* d, std::size_t n) {
  __m256d acc_w = _mm256_setzero_pd();
  __m256d acc_wd = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vw = _mm256_loadu_pd(w + i);
    std::int32_t packed = 0;
    __builtin_memcpy(&packed, d + i, 4);
    const __m256d vd = _mm256_cvtepi32_pd(_mm_cvtepu8_epi32(_mm_cvtsi32_si128(packed)));
    acc_w = _mm256_add_pd(acc_w, vw);
    acc_wd = _mm256_add_pd(acc_wd, _mm256_mul_pd(vw, vd));
  }

  alignas(32) double lanes_w[4];
  alignas(32) double lanes_wd[4];
  _mm256_store_pd(lanes_w, acc_w);
  _mm256_store_pd(lanes_wd, acc_wd);
  WeightedShare s;
  s.total = (lanes_w[0] + lanes_w[1]) + (lanes_w[2] + lanes_w[3]);
  s.minority = (lanes_wd[0] + lanes_wd[1]) + (lanes_wd[2] + lanes_wd[3]);
  for (; i < n; ++i) {
    s.total += w[i];
    if (d[i] != 0) s.minority += w[i];
  }
  return s;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", tally_avx2, tally_weighted_avx2, weighted_share_avx2};
  return table;
}

}  // namespace crr::kernels
