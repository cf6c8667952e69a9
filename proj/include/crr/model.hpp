#pragma once

// Closed-form estimands of the race / detainment / force model with
// mandatory reporting: force is only possible after a detainment, and every
// detainment is recorded. Everything here is a pure function of the seven
// numbers in PopulationModel.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crr {

/// Principal stratum: the pair (M(0), M(1)) of detainment counterfactuals.
enum class Stratum : unsigned char {
  always = 0,    // M(0) = M(1) = 1
  minority = 1,  // M(0) = 0, M(1) = 1
  majority = 2,  // M(0) = 1, M(1) = 0
  never = 3,     // M(0) = M(1) = 0
};

inline constexpr std::array<Stratum, 4> kAllStrata = {Stratum::always, Stratum::minority,
                                                      Stratum::majority, Stratum::never};

std::string_view to_string(Stratum s);

/// M(0) and M(1) implied by a stratum.
constexpr int mediator_under(Stratum s, int d) {
  switch (s) {
    case Stratum::always: return 1;
    case Stratum::minority: return d == 1 ? 1 : 0;
    case Stratum::majority: return d == 1 ? 0 : 1;
    case Stratum::never: return 0;
  }
  return 0;
}

/// One value per principal stratum, indexed by Stratum.
struct StratumVector {
  std::array<double, 4> values{};

  double& operator[](Stratum s) { return values[static_cast<std::size_t>(s)]; }
  double operator[](Stratum s) const { return values[static_cast<std::size_t>(s)]; }

  double dot(const StratumVector& other) const;
  double sum() const;
};

using ThetaVector = StratumVector;

struct StratumWeights {
  StratumVector w;
  bool normalized = false;

  StratumWeights normalize() const;
};

/// Parametric population of police-civilian encounters.
///
/// `p_d` is the minority share of encounters, `pi_*` the principal-stratum
/// masses, and `mu_01` / `mu_11` the force rates given detainment for the
/// majority and minority race. Force without detainment is identically zero,
/// so there are no `mu_00` / `mu_10` parameters.
struct PopulationModel {
  double p_d = 0.0;
  double pi_al = 0.0;
  double pi_mi = 0.0;
  double pi_ma = 0.0;
  double pi_ne = 0.0;
  double mu_01 = 0.0;
  double mu_11 = 0.0;

  static constexpr double kSumTolerance = 1e-12;

  /// Throws Error{InvalidModel} on out-of-range fields or strata masses that
  /// do not sum to one.
  void validate() const;
  bool is_valid() const noexcept;

  StratumVector strata() const;
  double stratum_mass(Stratum s) const { return strata()[s]; }

  double beta_m() const { return pi_mi - pi_ma; }
  double beta_y() const { return mu_11 - mu_01; }
  /// E[M(d)].
  double mediator_mean(int d) const;
  /// E[Y(d, 1)].
  double force_mean(int d) const { return d == 1 ? mu_11 : mu_01; }
  /// P(M = 1) over all encounters.
  double p_detained() const;
  /// P(D = 1 | M = 1).
  double p_minority_given_detained() const;

  friend bool operator==(const PopulationModel&, const PopulationModel&) = default;
};

/// Flat `key = value` text record. Unknown keys are rejected; `#` starts a
/// comment. A file may hold several records, each introduced by a `[label]`
/// line; a file without section headers holds a single unlabeled record.
std::string to_text(const PopulationModel& model);
PopulationModel model_from_text(std::string_view text);

struct LabeledModel {
  std::string label;
  PopulationModel model;
};
std::vector<LabeledModel> models_from_text(std::string_view text, std::string_view default_label);
std::vector<LabeledModel> load_model_file(const std::string& path);

enum class Estimand { ate, att, ate_m1, att_m1 };

inline constexpr std::array<Estimand, 4> kAllEstimands = {Estimand::ate, Estimand::att,
                                                          Estimand::ate_m1, Estimand::att_m1};

std::string_view to_string(Estimand e);

/// Stratum-specific effects E[Y(1) - Y(0) | S = s].
ThetaVector theta_of(const PopulationModel& model);

/// Unnormalized stratum weights of an estimand. Throws Error{ZeroMass} for
/// the detained-population estimands when every weight is zero.
StratumWeights weights_of(Estimand estimand, const PopulationModel& model);

struct EstimandValue {
  /// (w . theta) / (w . 1): the conditional expectation itself.
  double normalized = 0.0;
  /// w . theta with unnormalized weights.
  double raw_contrast = 0.0;
  /// w . 1
  double mass = 0.0;
};

EstimandValue estimand_value(Estimand estimand, const PopulationModel& model);

/// Overload used by fault-injection checks: evaluate with caller-supplied weights.
EstimandValue estimand_value(const StratumWeights& weights, const ThetaVector& theta);

struct EffectDecomposition {
  double pie = 0.0;  // pure indirect effect
  double pde = 0.0;  // pure direct effect
};

EffectDecomposition pie_pde(const PopulationModel& model);

/// E[Y(d)] = E[Y | M = 1, D = d] * P(M = 1 | D = d).
double identify_ey(int d, const PopulationModel& model);

/// E[Y(1)] / E[Y(0)]. Throws Error{ZeroDenominator} when E[Y(0)] = 0.
double crr_true(const PopulationModel& model);

/// E[Y | D = 1, M = 1] / E[Y | D = 0, M = 1] = mu_11 / mu_01.
double naive_rr_true(const PopulationModel& model);
double naive_rd_true(const PopulationModel& model);

/// Reference parameterizations used throughout the tests and the CLI.
namespace reference_models {

/// p_d = 0.5, strata (0.2, 0.1, 0, 0.7), mu = (0.1, 0.2). CRR = 3.
PopulationModel toy();

/// Detained-population paradox witnesses. `beta` sets both beta_M and
/// beta_Y; pi_al = 0.1, pi_ma = 0.05, mu_01 = 0.1.
PopulationModel paradox(double beta, double p_d);

}  // namespace reference_models

}  // namespace crr
