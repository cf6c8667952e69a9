#include "crr/kernels.hpp"

namespace crr::kernels {

namespace {

CellTally tally_scalar(const std::uint8_t* d, const std::uint8_t* y, std::size_t n) {
  CellTally t;
  t.total = n;
  for (std::size_t i = 0; i < n; ++i) {
    t.minority += d[i];
    t.force += y[i];
    t.minority_force += d[i] & y[i];
  }
  return t;
}

CellTally tally_weighted_scalar(const std::uint32_t* counts, const std::uint8_t* d,
                                const std::uint8_t* y, std::size_t n) {
  CellTally t;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t c = counts[i];
    t.total += c;
    t.minority += c * d[i];
    t.force += c * y[i];
    t.minority_force += c * (d[i] & y[i]);
  }
  return t;
}

WeightedShare weighted_share_scalar(const double* w, const std::uint8_t* d, std::size_t n) {
  WeightedShare s;
  for (std::size_t i = 0; i < n; ++i) {
    s.total += w[i];
    if (d[i] != 0) s.minority += w[i];
  }
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", tally_scalar, tally_weighted_scalar, weighted_share_scalar};
  return table;
}

}  // namespace crr::kernels
