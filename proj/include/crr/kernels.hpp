#pragma once

// Counting kernels behind the estimators and the bootstrap.
//
// Inputs are columnar 0/1 byte flags (race d, force y) plus optional
// per-row multiplicities or weights. Each backend fills a KernelTable; the
// scalar backend is the reference and every other backend must agree with it
// exactly for the integer kernels and to rounding for the floating-point one.
//
// Backend selection happens once, on first use: the best ISA the CPU reports,
// unless the CRR_KERNELS environment variable names one of
// "scalar", "avx2", "neon".

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace crr::kernels {

/// Counts over a 2x2 (race x force) table.
struct CellTally {
  std::uint64_t total = 0;     // rows (or summed multiplicities)
  std::uint64_t minority = 0;  // d = 1
  std::uint64_t force = 0;     // y = 1
  std::uint64_t minority_force = 0;  // d = 1 and y = 1

  friend bool operator==(const CellTally&, const CellTally&) = default;
};

struct WeightedShare {
  double total = 0.0;     // sum of w
  double minority = 0.0;  // sum of w * d
};

struct KernelTable {
  std::string_view name;

  // d and y hold only 0 or 1.
  CellTally (*tally)(const std::uint8_t* d, const std::uint8_t* y, std::size_t n);

  // Row i counts counts[i] times. Bootstrap resamples pass the multinomial
  // multiplicities here.
  CellTally (*tally_weighted)(const std::uint32_t* counts, const std::uint8_t* d,
                              const std::uint8_t* y, std::size_t n);

  WeightedShare (*weighted_share)(const double* w, const std::uint8_t* d, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(CRR_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(CRR_HAVE_NEON)
const KernelTable& neon_table();
#endif

/// Backends compiled in and supported by the running CPU, scalar first.
std::span<const KernelTable* const> available();

/// The dispatched backend.
const KernelTable& active();

/// Looks a backend up by name among available(); nullptr if absent.
const KernelTable* find(std::string_view name);

inline CellTally tally(std::span<const std::uint8_t> d, std::span<const std::uint8_t> y) {
  return active().tally(d.data(), y.data(), d.size());
}

inline CellTally tally_weighted(std::span<const std::uint32_t> counts,
                                std::span<const std::uint8_t> d,
                                std::span<const std::uint8_t> y) {
  return active().tally_weighted(counts.data(), d.data(), y.data(), d.size());
}

inline WeightedShare weighted_share(std::span<const double> w, std::span<const std::uint8_t> d) {
  return active().weighted_share(w.data(), d.data(), d.size());
}

}  // namespace crr::kernels
