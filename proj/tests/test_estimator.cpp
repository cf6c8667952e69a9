#include <doctest.h>

#include <cmath>

#include "crr/data.hpp"
#include "crr/errors.hpp"
#include "crr/estimator.hpp"
#include "crr/simulator.hpp"
#include "crr/verify.hpp"

using namespace crr;

namespace {

template <class F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

ExternalRaceDistribution census_of(const EncounterTable& table) {
  ExternalRaceDistribution census(SourceKind::census_fixed, "census");
  std::vector<std::pair<double, double>> counts(table.strata.size());
  for (const auto& e : table.rows) (e.d ? counts[e.x].first : counts[e.x].second) += 1;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    census.set_census_counts(table.strata[i], counts[i].first, counts[i].second);
  }
  return census;
}

}  // namespace

TEST_CASE("worked bias factor example") {
  // odds(0.8) / odds(0.25) = 4 / (1/3). 0.8 and 1 - 0.8 are not exact in
  // binary, so the double result sits a few ulps above 12.
  CHECK(std::abs(bias_factor_from_shares(0.8, 0.25) - 12.0) <= 1e-12);
}

TEST_CASE("degenerate shares") {
  CHECK(error_kind([] { bias_factor_from_shares(1.0, 0.3); }) == ErrorKind::DegenerateOdds);
  CHECK(error_kind([] { bias_factor_from_shares(0.5, 0.0); }) == ErrorKind::DegenerateOdds);
}

TEST_CASE("group counts and naive contrasts") {
  StratumSample s;
  s.d = {1, 1, 1, 1, 0, 0, 0, 0, 0};
  s.y = {1, 1, 0, 0, 1, 0, 0, 0, 0};
  const auto g = group_counts(s);
  CHECK(g.n1 == 4);
  CHECK(g.n0 == 5);
  CHECK(g.y1 == 2);
  CHECK(g.y0 == 1);
  CHECK(naive_risk_ratio(g) == doctest::Approx(0.5 / 0.2));
  CHECK(naive_risk_difference(g) == doctest::Approx(0.3));
  // Detained minority share 4/9 against an encounter share of 1/3.
  CHECK(bias_factor(g, 1.0 / 3.0) == doctest::Approx((4.0 / 5.0) / 0.5));
  CHECK(crr_identified(g, 1.0 / 3.0) == doctest::Approx(2.5 * 1.6));

  const auto h = group_counts(s, {true});
  CHECK(h.n1 == 5);
  CHECK(h.y1 == 2.5);
  CHECK(naive_risk_ratio(h) == doctest::Approx((2.5 / 5) / (1.5 / 6)));
}

TEST_CASE("undefined cases raise typed errors") {
  GroupCounts no_minority{0, 5, 0, 1};
  CHECK(error_kind([&] { naive_risk_ratio(no_minority); }) == ErrorKind::MissingGroup);
  GroupCounts no_force_majority{5, 5, 2, 0};
  CHECK(error_kind([&] { naive_risk_ratio(no_force_majority); }) == ErrorKind::ZeroDenominator);
  // A zero numerator is a valid ratio of zero.
  GroupCounts no_force_minority{5, 5, 0, 2};
  CHECK(naive_risk_ratio(no_force_minority) == 0.0);
  CHECK(error_kind([] { evaluate(Statistic::crr, GroupCounts{1, 1, 1, 1}, std::nullopt); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("naive RR times bias factor recovers the encounter risk ratio exactly") {
  Rng rng(31);
  const ModelSampler sampler{0.05, 0.95, 2, false};
  for (int i = 0; i < 20; ++i) {
    const auto m = sampler(rng);
    const auto table = sample_encounters(m, 20000, derive_seed(31, i));
    const auto admin = to_administrative(table);
    const auto census = census_of(table);
    const auto oracle = oracle_estimands(table);
    if (!oracle.crr_encounter.defined()) continue;
    const double est = crr_identified(admin, census, "all");
    CHECK(std::abs(est - *oracle.crr_encounter.value) <= 1e-10 * std::max(1.0, est));
    CHECK(naive_risk_ratio(admin, "all") * bias_factor(admin, census, "all") == doctest::Approx(est));
  }
}

TEST_CASE("monotone models: naive RR never exceeds CRR") {
  Rng rng(41);
  const ModelSampler sampler{0.0, 1.0, 1, true};
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = sampler(rng);
    if (m.mu_01 <= 0.0 || m.pi_al <= 0.0) continue;
    ++compared;
    CHECK(naive_rr_true(m) <= crr_true(m) + 1e-12);
  }
  CHECK(compared > 900);
}

TEST_CASE("sensitivity mixture") {
  ExternalRaceDistribution census(SourceKind::census_fixed, "census");
  census.set_census_counts("low", 5, 95);
  census.set_census_counts("high", 95, 5);
  const auto half = sensitivity_mixture(census, 0.367, 0.5);
  CHECK(half.p1("low") == doctest::Approx(0.5 * 0.05 + 0.5 * 0.367));
  CHECK(half.p1("high") == doctest::Approx(0.5 * 0.95 + 0.5 * 0.367));
  CHECK(sensitivity_mixture(census, 0.367, 1.0).p1("low") == doctest::Approx(0.05));
  CHECK(sensitivity_mixture(census, 0.367, 0.0).p1("high") == doctest::Approx(0.367));
  CHECK_THROWS_AS(sensitivity_mixture(census, 0.367, 1.5), Error);
  CHECK_THROWS_AS(sensitivity_mixture(census, 1.0, 0.5), Error);
  // The source is not modified.
  CHECK(census.p1("low") == doctest::Approx(0.05));
}

TEST_CASE("external lookup") {
  ExternalRaceDistribution census(SourceKind::census_fixed, "census");
  census.set_census_counts("a", 1, 3);
  census.set_census_counts("empty", 0, 0);
  CHECK(census.p1("a") == 0.25);
  CHECK(error_kind([&] { census.p1("b"); }) == ErrorKind::UnknownStratum);
  CHECK(error_kind([&] { census.p1("empty"); }) == ErrorKind::ZeroMass);
  CHECK(!census.try_p1("empty"));

  ExternalRaceDistribution survey(SourceKind::survey_resampled, "survey");
  survey.add_respondent(kAnyStratum, 1, 2.0);
  survey.add_respondent(kAnyStratum, 0, 6.0);
  survey.finalize();
  // A source without geography answers for every stratum.
  CHECK(survey.p1("anything") == 0.25);
}
