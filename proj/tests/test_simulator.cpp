#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crr/data.hpp"
#include "crr/errors.hpp"
#include "crr/simulator.hpp"
#include "crr/verify.hpp"
#include "support/enumeration.hpp"

using namespace crr;

TEST_CASE("rows respect the model's structure") {
  const auto table = sample_encounters(reference_models::toy(), 50000, 5);
  REQUIRE(table.rows.size() == 50000);
  for (const auto& e : table.rows) {
    REQUIRE(e.m == (e.d ? e.m1 : e.m0));
    REQUIRE(e.y == e.y_under(e.d));
    // No force without a stop.
    REQUIRE((e.m == 1 || e.y == 0));
    // The toy model has no majority-only stratum.
    REQUIRE(e.s != Stratum::majority);
  }
}

TEST_CASE("same seed gives the same table for any thread count") {
  const auto m = reference_models::paradox(0.01, 0.3);
  const std::size_t n = 3 * kShardRows + 17;
  const auto a = sample_encounters(m, n, 77, {"all", 1});
  const auto b = sample_encounters(m, n, 77, {"all", 4});
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(pattern_counts(a) == pattern_counts(b));
  std::ostringstream sa, sb;
  write_encounters_csv(a, sa);
  write_encounters_csv(b, sb);
  CHECK(sa.str() == sb.str());
  const auto c = sample_encounters(m, n, 78);
  CHECK(pattern_counts(a) != pattern_counts(c));
}

TEST_CASE("empirical frequencies match the model") {
  const auto m = reference_models::toy();
  const std::size_t n = 400000;
  const auto table = sample_encounters(m, n, 9);
  const auto ref = testing::reference(m);
  const auto o = oracle_estimands(table);
  REQUIRE(o.p_detained.defined());
  CHECK(std::abs(*o.p_detained.value - ref.p_detained) < 4 * o.p_detained.se);
  CHECK(std::abs(*o.ate.value - ref.ate) < 4 * o.ate.se);
  CHECK(std::abs(*o.crr.value - ref.crr) < 4 * o.crr.se);
  CHECK(std::abs(*o.naive_rr.value - ref.naive_rr) < 4 * o.naive_rr.se);
}

TEST_CASE("oracle from pattern counts equals oracle from rows") {
  const auto table = sample_encounters(reference_models::toy(), 20000, 3);
  const auto a = oracle_estimands(table);
  const auto b = oracle_estimands(pattern_counts(table));
  CHECK(*a.crr.value == *b.crr.value);
  CHECK(a.crr.se == b.crr.se);
}

TEST_CASE("oracle on a hand-built population") {
  // Four units: always-stop minority with force, minority-stop minority
  // without, always-stop majority with force, never-stop majority.
  PatternCounts c{};
  auto bin = [](int d, int m0, int m1, int y01, int y11) { return d | m0 << 1 | m1 << 2 | y01 << 3 | y11 << 4; };
  c[bin(1, 1, 1, 1, 1)] = 1;
  c[bin(1, 0, 1, 0, 0)] = 1;
  c[bin(0, 1, 1, 1, 1)] = 1;
  c[bin(0, 0, 0, 0, 0)] = 1;
  const auto o = oracle_estimands(c);
  CHECK(o.n == 4);
  // Y(1) = m1*y11: 1,0,1,0 ; Y(0) = m0*y01: 1,0,1,0.
  CHECK(*o.ate.value == doctest::Approx(0.0));
  CHECK(*o.crr.value == doctest::Approx(1.0));
  // Observed: detained minorities {1,0}, detained majority {1}.
  CHECK(*o.naive_rr.value == doctest::Approx(0.5));
  CHECK(*o.p_detained.value == doctest::Approx(0.75));
}

TEST_CASE("administrative projection keeps detained rows only") {
  const auto table = sample_encounters(reference_models::toy(), 10000, 4);
  const auto admin = to_administrative(table);
  std::size_t detained = 0;
  for (const auto& e : table.rows) detained += e.m;
  CHECK(admin.size() == detained);
}

TEST_CASE("concat merges strata") {
  auto a = sample_encounters(reference_models::toy(), 100, 1, {"north"});
  auto b = sample_encounters(reference_models::toy(), 50, 2, {"south"});
  auto c = sample_encounters(reference_models::toy(), 10, 3, {"north"});
  const auto all = concat({a, b, c});
  CHECK(all.rows.size() == 160);
  REQUIRE(all.strata.size() == 2);
  CHECK(all.stratum_key(all.rows[155]) == "north");
  CHECK(all.stratum_key(all.rows[120]) == "south");
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(sample_encounters(reference_models::toy(), 0, 1), Error);
  auto bad = reference_models::toy();
  bad.pi_al = 0.5;
  CHECK_THROWS_AS(sample_encounters(bad, 10, 1), Error);
}

TEST_CASE("monotone models: population bias factor is at least one") {
  Rng rng(21);
  const ModelSampler sampler{0.0, 1.0, 1, true};
  for (int i = 0; i < 200; ++i) {
    const auto m = sampler(rng);
    if (m.p_detained() <= 0.0 || m.p_d <= 0.0 || m.p_d >= 1.0) continue;
    const auto ref = testing::reference(m);
    CHECK(ref.p_minority_detained >= m.p_d - 1e-12);
  }
}
