#pragma once

// Seeded random streams.
//
// Engine: std::mt19937_64 seeded with a single 64-bit word.
// Sub-streams: derive_seed(master, k) = splitmix64_mix(master + (k + 1) * 0x9E3779B97F4A7C15).
// Uniforms: the top 53 bits of one engine output scaled by 2^-53, so u in [0, 1).
// Bernoulli(p): u < p. Bounded integers: Lemire's multiply-shift with rejection.
//
// Streams are bit-reproducible within this implementation only.

#include <cstdint>
#include <random>
#include <span>

namespace crr {

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Independent sub-seed for stream `stream` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

inline constexpr std::uint64_t kDefaultSeed = 20240917;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Index drawn with probabilities proportional to `weights` (which sum to
  /// ~1). Falls back to the last positive weight on rounding overshoot.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace crr
