#include <doctest.h>

#include <cmath>
#include <vector>

#include "crr/kernels.hpp"
#include "crr/rng.hpp"

using namespace crr;
using kernels::CellTally;

namespace {

CellTally naive_tally(const std::vector<std::uint32_t>& c, const std::vector<std::uint8_t>& d,
                      const std::vector<std::uint8_t>& y) {
  CellTally t;
  for (std::size_t i = 0; i < d.size(); ++i) {
    t.total += c[i];
    t.minority += c[i] * d[i];
    t.force += c[i] * y[i];
    t.minority_force += c[i] * d[i] * y[i];
  }
  return t;
}

struct Case {
  std::vector<std::uint8_t> d, y;
  std::vector<std::uint32_t> counts;
  std::vector<double> w;
};

Case random_case(Rng& rng, std::size_t n) {
  Case c;
  for (std::size_t i = 0; i < n; ++i) {
    c.d.push_back(rng.bernoulli(0.4));
    c.y.push_back(rng.bernoulli(0.3));
    c.counts.push_back(static_cast<std::uint32_t>(rng.below(5)));
    c.w.push_back(rng.uniform() * 3.0);
  }
  return c;
}

}  // namespace

TEST_CASE("scalar backend is always available and listed first") {
  const auto tables = kernels::available();
  REQUIRE(!tables.empty());
  CHECK(tables.front()->name == "scalar");
  CHECK(kernels::find("scalar") == &kernels::scalar_table());
  CHECK(kernels::find("no-such-backend") == nullptr);
}

TEST_CASE("every backend agrees with a plain loop") {
  Rng rng(11);
  std::vector<std::size_t> lengths = {0, 1, 7, 31, 32, 33, 63, 64, 65, 255, 256, 257, 1000, 4099};
  for (int i = 0; i < 30; ++i) lengths.push_back(rng.below(20000));
  // Long enough to overflow any 8-bit or 16-bit intermediate.
  lengths.push_back(300000);

  for (std::size_t n : lengths) {
    const auto c = random_case(rng, n);
    const std::vector<std::uint32_t> ones(n, 1);
    const auto expect_plain = naive_tally(ones, c.d, c.y);
    const auto expect_weighted = naive_tally(c.counts, c.d, c.y);
    double wt = 0.0, wm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wt += c.w[i];
      wm += c.w[i] * c.d[i];
    }
    for (const auto* table : kernels::available()) {
      CAPTURE(table->name);
      CAPTURE(n);
      CHECK(table->tally(c.d.data(), c.y.data(), n) == expect_plain);
      CHECK(table->tally_weighted(c.counts.data(), c.d.data(), c.y.data(), n) == expect_weighted);
      const auto share = table->weighted_share(c.w.data(), c.d.data(), n);
      CHECK(std::abs(share.total - wt) <= 1e-9 * (1.0 + wt));
      CHECK(std::abs(share.minority - wm) <= 1e-9 * (1.0 + wm));
    }
  }
}

TEST_CASE("unaligned views") {
  Rng rng(12);
  const auto c = random_case(rng, 5000);
  for (std::size_t off = 0; off < 9; ++off) {
    const std::size_t n = c.d.size() - off;
    const auto& s = kernels::scalar_table();
    for (const auto* table : kernels::available()) {
      CAPTURE(table->name);
      CHECK(table->tally(c.d.data() + off, c.y.data() + off, n) == s.tally(c.d.data() + off, c.y.data() + off, n));
      CHECK(table->tally_weighted(c.counts.data() + off, c.d.data() + off, c.y.data() + off, n) ==
            s.tally_weighted(c.counts.data() + off, c.d.data() + off, c.y.data() + off, n));
    }
  }
}

TEST_CASE("large multiplicities do not wrap") {
  const std::size_t n = 1000;
  std::vector<std::uint8_t> d(n, 1), y(n, 1);
  std::vector<std::uint32_t> counts(n, 0xFFFFFFFFu);
  for (const auto* table : kernels::available()) {
    const auto t = table->tally_weighted(counts.data(), d.data(), y.data(), n);
    CHECK(t.total == std::uint64_t{0xFFFFFFFFu} * n);
    CHECK(t.minority_force == t.total);
  }
}
