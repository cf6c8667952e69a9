#include <doctest.h>

#include <cmath>

#include "crr/errors.hpp"
#include "crr/model.hpp"
#include "crr/rng.hpp"
#include "crr/verify.hpp"
#include "support/enumeration.hpp"

using namespace crr;

namespace {

constexpr double kTight = 1e-12;

void check_against_enumeration(const PopulationModel& m) {
  const auto ref = testing::reference(m);
  CHECK(std::abs(estimand_value(Estimand::ate, m).normalized - ref.ate) < kTight);
  CHECK(std::abs(estimand_value(Estimand::att, m).normalized - ref.att) < kTight);
  CHECK(std::abs(estimand_value(Estimand::ate_m1, m).normalized - ref.ate_m1) < kTight);
  CHECK(std::abs(estimand_value(Estimand::att_m1, m).normalized - ref.att_m1) < kTight);
  CHECK(std::abs(estimand_value(Estimand::ate_m1, m).raw_contrast - ref.ate_m1_raw) < kTight);
  CHECK(std::abs(estimand_value(Estimand::att_m1, m).raw_contrast - ref.att_m1_raw) < kTight);
  const auto dec = pie_pde(m);
  CHECK(std::abs(dec.pie - ref.pie) < kTight);
  CHECK(std::abs(dec.pde - ref.pde) < kTight);
  CHECK(std::abs(identify_ey(1, m) - ref.ey1) < kTight);
  CHECK(std::abs(identify_ey(0, m) - ref.ey0) < kTight);
  CHECK(std::abs(crr_true(m) - ref.crr) < 1e-10 * ref.crr);
  CHECK(std::abs(naive_rr_true(m) - ref.naive_rr) < 1e-10 * ref.naive_rr);
  CHECK(std::abs(naive_rd_true(m) - ref.naive_rd) < kTight);
  CHECK(std::abs(m.p_detained() - ref.p_detained) < kTight);
  CHECK(std::abs(m.p_minority_given_detained() - ref.p_minority_detained) < kTight);
}

}  // namespace

TEST_CASE("toy model closed forms") {
  const auto m = reference_models::toy();
  CHECK(crr_true(m) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(naive_rr_true(m) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.p_detained() == doctest::Approx(0.25));
  CHECK(m.p_minority_given_detained() == doctest::Approx(0.6));
  CHECK(estimand_value(Estimand::ate, m).normalized == doctest::Approx(0.04));
  CHECK(pie_pde(m).pie == doctest::Approx(0.02));
  CHECK(pie_pde(m).pde == doctest::Approx(0.02));
  check_against_enumeration(m);
}

TEST_CASE("closed forms match brute-force enumeration on random models") {
  Rng rng(7);
  const ModelSampler sampler{0.01, 0.99, 1, false};
  for (int i = 0; i < 500; ++i) {
    const auto m = sampler(rng);
    CAPTURE(to_text(m));
    check_against_enumeration(m);
  }
}

TEST_CASE("reference counterexample contrasts by enumeration") {
  for (const auto& ce : reference_counterexamples()) {
    const auto ref = testing::reference(ce.model);
    const double raw = ce.estimand == Estimand::ate_m1 ? ref.ate_m1_raw : ref.att_m1_raw;
    CAPTURE(ce.label);
    CHECK(std::abs(raw - ce.expected_raw_contrast) < 0.5e-6);
  }
}

TEST_CASE("theta and weights") {
  const auto m = reference_models::paradox(0.01, 0.01);
  const auto t = theta_of(m);
  CHECK(t[Stratum::always] == doctest::Approx(m.beta_y()));
  CHECK(t[Stratum::minority] == doctest::Approx(m.mu_11));
  CHECK(t[Stratum::majority] == doctest::Approx(-m.mu_01));
  CHECK(t[Stratum::never] == 0.0);
  const auto w = weights_of(Estimand::ate_m1, m);
  CHECK(w.w[Stratum::always] == doctest::Approx(m.pi_al));
  CHECK(w.w[Stratum::minority] == doctest::Approx(m.pi_mi * m.p_d));
  CHECK(w.w[Stratum::majority] == doctest::Approx(m.pi_ma * (1 - m.p_d)));
  CHECK(w.w[Stratum::never] == 0.0);
  const auto n = w.normalize();
  CHECK(n.normalized);
  CHECK(n.w.sum() == doctest::Approx(1.0));
}

TEST_CASE("validation") {
  auto m = reference_models::toy();
  CHECK(m.is_valid());
  m.pi_ne += 1e-9;
  CHECK_FALSE(m.is_valid());
  try {
    m.validate();
    FAIL("expected InvalidModel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidModel);
  }
  m = reference_models::toy();
  m.mu_01 = 1.5;
  CHECK_FALSE(m.is_valid());
}

TEST_CASE("degenerate estimands raise typed errors") {
  PopulationModel never{0.5, 0.0, 0.0, 0.0, 1.0, 0.3, 0.4};
  try {
    (void)estimand_value(Estimand::ate_m1, never);
    FAIL("expected ZeroMass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroMass);
  }
  PopulationModel no_force{0.5, 0.5, 0.0, 0.0, 0.5, 0.0, 0.4};
  try {
    (void)crr_true(no_force);
    FAIL("expected ZeroDenominator");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroDenominator);
  }
}

TEST_CASE("model text round trip") {
  const auto m = reference_models::paradox(-0.01, 0.99);
  CHECK(model_from_text(to_text(m)) == m);

  const auto many = models_from_text(
      "# two precincts\n[north]\np_d = 0.5\npi_al = 0.2\npi_mi = 0.1\npi_ma = 0\npi_ne = 0.7\n"
      "mu_01 = 0.1\nmu_11 = 0.2\n\n[south]\np_d = 0.3\npi_al = 0.1\npi_mi = 0.1\npi_ma = 0.1\n"
      "pi_ne = 0.7\nmu_01 = 0.2\nmu_11 = 0.2\n",
      "all");
  REQUIRE(many.size() == 2);
  CHECK(many[0].label == "north");
  CHECK(many[0].model == reference_models::toy());
  CHECK(many[1].label == "south");
  CHECK(many[1].model.p_d == 0.3);

  CHECK_THROWS_AS(model_from_text("p_d = 0.5\nbogus = 1\n"), Error);
  CHECK_THROWS_AS(model_from_text(""), Error);
}
