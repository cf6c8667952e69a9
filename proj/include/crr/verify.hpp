#pragma once

// Self-checks of the closed-form model: the detained-population paradox
// witnesses, sign consistency of ATE/ATT, the PIE + PDE = ATE identity, and
// agreement with the Monte Carlo oracle.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crr/model.hpp"
#include "crr/rng.hpp"

namespace crr {

using WeightsFn = std::function<StratumWeights(Estimand, const PopulationModel&)>;

/// weights_of with the minority/majority prevalence swapped in the ATE_M1
/// weights. Used to confirm the checks detect a wrong weight formula.
StratumWeights perturbed_weights_of(Estimand estimand, const PopulationModel& model);

/// Random valid model: p_d and both force rates uniform on [lo, hi]; strata
/// masses symmetric Dirichlet with integer `shape` (each component a sum of
/// `shape` unit exponentials, normalized). With `monotone`, pi_ma = 0.
struct ModelSampler {
  double lo = 0.0;
  double hi = 1.0;
  unsigned shape = 1;
  bool monotone = false;

  PopulationModel operator()(Rng& rng) const;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Counterexample {
  std::string label;
  Estimand estimand;
  PopulationModel model;
  double expected_raw_contrast;
};

/// The three reference parameterizations and their published raw contrasts.
std::vector<Counterexample> reference_counterexamples();

struct VerifyOptions {
  std::uint64_t seed = kDefaultSeed;
  std::size_t sign_draws = 10000;
  std::size_t oracle_models = 100;
  std::size_t oracle_rows = 100000;
  double oracle_z = 4.0;
  unsigned threads = 1;
  /// Evaluate with perturbed_weights_of instead of weights_of.
  bool inject_fault = false;
};

CheckResult check_counterexamples(const WeightsFn& weights);
CheckResult check_sign_consistency(std::uint64_t seed, std::size_t draws, const WeightsFn& weights);
CheckResult check_paradox_existence(std::uint64_t seed, std::size_t draws, const WeightsFn& weights);
CheckResult check_decomposition(std::uint64_t seed, std::size_t draws, const WeightsFn& weights);
CheckResult check_oracle_agreement(std::uint64_t seed, std::size_t models, std::size_t rows, double z,
                                   unsigned threads, const WeightsFn& weights);

std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace crr
