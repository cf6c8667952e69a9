#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crr/data.hpp"
#include "crr/errors.hpp"
#include "crr/estimator.hpp"
#include "crr/simulator.hpp"

using namespace crr;

namespace {

AdministrativeDataset toy_admin(std::size_t n, std::uint64_t seed) {
  return to_administrative(sample_encounters(reference_models::toy(), n, seed));
}

ExternalRaceDistribution half_census() {
  ExternalRaceDistribution c(SourceKind::census_fixed, "census");
  c.set_census_counts("all", 50, 50);
  return c;
}

}  // namespace

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  CHECK(quantile_sorted(v, 0.0) == 1);
  CHECK(quantile_sorted(v, 1.0) == 5);
  CHECK(quantile_sorted(v, 0.5) == 3);
  CHECK(quantile_sorted(v, 0.1) == doctest::Approx(1.4));
  CHECK(quantile_sorted({7.0}, 0.3) == 7.0);
  CHECK_THROWS_AS(quantile_sorted({}, 0.5), Error);
}

TEST_CASE("deterministic for a seed, independent of threads") {
  const auto data = toy_admin(8000, 1);
  const auto census = half_census();
  BootstrapOptions opt;
  opt.replicates = 400;
  opt.seed = 5;
  const auto a = bootstrap(Statistic::crr, data, &census, "all", opt);
  opt.threads = 3;
  const auto b = bootstrap(Statistic::crr, data, &census, "all", opt);
  CHECK(a.point == b.point);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  opt.seed = 6;
  const auto c = bootstrap(Statistic::crr, data, &census, "all", opt);
  CHECK(a.point == c.point);
  CHECK(a.lo != c.lo);
}

TEST_CASE("interval brackets the point estimate") {
  const auto data = toy_admin(20000, 2);
  const auto census = half_census();
  for (auto s : {Statistic::naive_rd, Statistic::naive_rr, Statistic::bias_factor, Statistic::crr}) {
    const auto e = bootstrap(s, data, &census, "all", {300, 0.9, 3, 1, false});
    CAPTURE(to_string(s));
    CHECK(e.lo <= e.point);
    CHECK(e.point <= e.hi);
    CHECK(e.level == 0.9);
    CHECK(e.replicates == 300);
    CHECK(e.undefined_replicates == 0);
  }
}

TEST_CASE("census shares stay fixed across replicates") {
  // Only the share enters the replicates, never the population counts.
  const auto data = toy_admin(8000, 12);
  ExternalRaceDistribution small(SourceKind::census_fixed, "census");
  small.set_census_counts("all", 3, 7);
  ExternalRaceDistribution large(SourceKind::census_fixed, "census");
  large.set_census_counts("all", 300000, 700000);
  const BootstrapOptions opt{300, 0.95, 8, 1, false};
  const auto a = bootstrap(Statistic::crr, data, &small, "all", opt);
  const auto b = bootstrap(Statistic::crr, data, &large, "all", opt);
  CHECK(a.point == b.point);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
}

TEST_CASE("survey respondents are resampled") {
  const auto data = toy_admin(20000, 3);
  ExternalRaceDistribution survey(SourceKind::survey_resampled, "survey");
  for (int i = 0; i < 400; ++i) survey.add_respondent(kAnyStratum, i % 2, 1.0);
  survey.finalize();
  const auto census = half_census();
  const BootstrapOptions opt{500, 0.95, 4, 1, false};
  const auto with_survey = bootstrap(Statistic::crr, data, &survey, "all", opt);
  const auto with_census = bootstrap(Statistic::crr, data, &census, "all", opt);
  // Same point estimate (both shares are 0.5), wider interval when the share
  // itself is uncertain.
  CHECK(with_survey.point == doctest::Approx(with_census.point));
  CHECK(with_survey.hi - with_survey.lo > with_census.hi - with_census.lo);
}

TEST_CASE("identical rows give a degenerate but defined interval") {
  StratumSample s;
  for (int i = 0; i < 50; ++i) {
    s.d.push_back(i % 2);
    s.y.push_back(1);
  }
  const auto e = bootstrap(Statistic::naive_rr, s, nullptr, "all", {200, 0.95, 1, 1, false});
  CHECK(e.point == 1.0);
  CHECK(e.lo == 1.0);
  CHECK(e.hi == 1.0);
}

TEST_CASE("too many undefined replicates") {
  // A single minority row and a single majority row with force: a replicate
  // is undefined when it misses either, which happens about 60% of the time.
  StratumSample s;
  s.d.assign(40, 0);
  s.y.assign(40, 0);
  s.d[0] = 1;
  s.y[1] = 1;
  try {
    (void)bootstrap(Statistic::naive_rr, s, nullptr, "all", {200, 0.95, 1, 1, false});
    FAIL("expected TooManyUndefined");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooManyUndefined);
  }
  AdministrativeDataset data;
  for (std::size_t i = 0; i < s.size(); ++i) data.add(s.d[i], s.y[i], "x");
  const auto m = try_bootstrap(Statistic::naive_rr, data, nullptr, "x", {200, 0.95, 1, 1, false});
  CHECK(!m.defined());
  CHECK(m.error == ErrorKind::TooManyUndefined);
}

TEST_CASE("stratified estimates") {
  AdministrativeDataset data;
  const auto a = toy_admin(4000, 10);
  for (std::size_t i = 0; i < a.size(); ++i) data.add(a.race()[i], a.force()[i], i % 2 ? "odd" : "even");
  data.add(1, 1, "tiny");
  ExternalRaceDistribution census(SourceKind::census_fixed, "census");
  census.set_census_counts("odd", 1, 1);
  census.set_census_counts("even", 1, 1);
  census.set_census_counts("tiny", 1, 1);
  const auto rows = stratified_estimates(data, &census, {"odd", "even", "tiny"}, {100, 0.95, 1, 1, false});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].naive.defined());
  CHECK(rows[0].adjusted->defined());
  CHECK(!rows[2].naive.defined());
  CHECK(rows[2].naive.error == ErrorKind::MissingGroup);
  CHECK_THROWS_AS(stratified_estimates(data, &census, {"nowhere"}), Error);
}

TEST_CASE("argument checks") {
  const auto data = toy_admin(2000, 11);
  CHECK_THROWS_AS(bootstrap(Statistic::crr, data, nullptr, "all"), Error);
  CHECK_THROWS_AS(bootstrap(Statistic::naive_rr, data, nullptr, "all", {1, 0.95, 1, 1, false}), Error);
  CHECK_THROWS_AS(bootstrap(Statistic::naive_rr, data, nullptr, "all", {100, 1.0, 1, 1, false}), Error);
  CHECK_THROWS_AS(bootstrap(Statistic::naive_rr, data, nullptr, "nowhere"), Error);
}
