// AArch64 backend. NEON is architecturally guaranteed on AArch64, so no
// runtime probe is needed.

#include <arm_neon.h>

#include "crr/kernels.hpp"

namespace crr::kernels {

namespace {

CellTally tally_neon(const std::uint8_t* d, const std::uint8_t* y, std::size_t n) {
  uint64x2_t acc_d = vdupq_n_u64(0);
  uint64x2_t acc_y = vdupq_n_u64(0);
  uint64x2_t acc_dy = vdupq_n_u64(0);

  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t vd = vld1q_u8(d + i);
    const uint8x16_t vy = vld1q_u8(y + i);
    acc_d = vpadalq_u32(acc_d, vpaddlq_u16(vpaddlq_u8(vd)));
    acc_y = vpadalq_u32(acc_y, vpaddlq_u16(vpaddlq_u8(vy)));
    acc_dy = vpadalq_u32(acc_dy, vpaddlq_u16(vpaddlq_u8(vandq_u8(vd, vy))));
  }

  CellTally t;
  t.total = n;
  t.minority = vaddvq_u64(acc_d);
  t.force = vaddvq_u64(acc_y);
  t.minority_force = vaddvq_u64(acc_dy);
  for (; i < n; ++i) {
    t.minority += d[i];
    t.force += y[i];
    t.minority_force += d[i] & y[i];
  }
  return t;
}

CellTally tally_weighted_neon(const std::uint32_t* counts, const std::uint8_t* d,
                              const std::uint8_t* y, std::size_t n) {
  uint64x2_t acc_c = vdupq_n_u64(0);
  uint64x2_t acc_d = vdupq_n_u64(0);
  uint64x2_t acc_y = vdupq_n_u64(0);
  uint64x2_t acc_dy = vdupq_n_u64(0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const uint32x4_t c = vld1q_u32(counts + i);
    const uint32x4_t vd = {d[i], d[i + 1], d[i + 2], d[i + 3]};  // 0/1 flags
    const uint32x4_t vy = {y[i], y[i + 1], y[i + 2], y[i + 3]};
    const uint32x4_t cd = vmulq_u32(c, vd);
    acc_c = vpadalq_u32(acc_c, c);
    acc_d = vpadalq_u32(acc_d, cd);
    acc_y = vpadalq_u32(acc_y, vmulq_u32(c, vy));
    acc_dy = vpadalq_u32(acc_dy, vmulq_u32(cd, vy));
  }

  CellTally t;
  t.total = vaddvq_u64(acc_c);
  t.minority = vaddvq_u64(acc_d);
  t.force = vaddvq_u64(acc_y);
  t.minority_force = vaddvq_u64(acc_dy);
  for (; i < n; ++i) {
    const std::uint64_t c = counts[i];
    t.total += c;
    t.minority += c * d[i];
    t.force += c * y[i];
    t.minority_force += c * (d[i] & y[i]);
  }
  return t;
}

WeightedShare weighted_share_neon(const double* w, const std::uint8_t* d, std::size_t n) {
  float64x2_t acc_w = vdupq_n_f64(0.0);
  float64x2_t acc_wd = vdupq_n_f64(0.0);

  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vw = vld1q_f64(w + i);
    const float64x2_t vd = {static_cast<double>(d[i]), static_cast<double>(d[i + 1])};
    acc_w = vaddq_f64(acc_w, vw);
    acc_wd = vaddq_f64(acc_wd, vmulq_f64(vw, vd));
  }

  WeightedShare s;
  s.total = vaddvq_f64(acc_w);
  s.minority = vaddvq_f64(acc_wd);
  for (; i < n; ++i) {
    s.total += w[i];
    if (d[i] != 0) s.minority += w[i];
  }
  return s;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{"neon", tally_neon, tally_weighted_neon, weighted_share_neon};
  return table;
}

}  // namespace crr::kernels
