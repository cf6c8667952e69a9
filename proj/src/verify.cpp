#include "crr/verify.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "crr/errors.hpp"
#include "crr/simulator.hpp"

namespace crr {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double gamma_integer_shape(Rng& rng, unsigned shape) {
  double acc = 0.0;
  for (unsigned k = 0; k < shape; ++k) acc -= std::log1p(-rng.uniform());
  return acc;
}

double value_of(Estimand e, const PopulationModel& m, const WeightsFn& weights) {
  return estimand_value(weights(e, m), theta_of(m)).normalized;
}

}  // namespace

StratumWeights perturbed_weights_of(Estimand estimand, const PopulationModel& model) {
  if (estimand != Estimand::ate_m1) return weights_of(estimand, model);
  PopulationModel swapped = model;
  swapped.p_d = 1.0 - model.p_d;
  return weights_of(estimand, swapped);
}

PopulationModel ModelSampler::operator()(Rng& rng) const {
  PopulationModel m;
  m.p_d = uniform_in(rng, lo, hi);
  std::array<double, 4> g{};
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = gamma_integer_shape(rng, std::max(1u, shape));
  if (monotone) g[static_cast<std::size_t>(Stratum::majority)] = 0.0;
  const double total = g[0] + g[1] + g[2] + g[3];
  m.pi_al = g[0] / total;
  m.pi_mi = g[1] / total;
  m.pi_ma = g[2] / total;
  m.pi_ne = std::max(0.0, 1.0 - m.pi_al - m.pi_mi - m.pi_ma);
  m.mu_01 = uniform_in(rng, lo, hi);
  m.mu_11 = uniform_in(rng, lo, hi);
  return m;
}

std::vector<Counterexample> reference_counterexamples() {
  return {
      {"beta_M = beta_Y = 0.01, P(D=1) = 0.01", Estimand::ate_m1, reference_models::paradox(0.01, 0.01), -0.003884},
      {"beta_M = beta_Y = -0.01, P(D=1) = 0.99", Estimand::ate_m1, reference_models::paradox(-0.01, 0.99), 0.002514},
      {"beta_M = beta_Y = -0.01, P(D=1) = 0.01", Estimand::att_m1, reference_models::paradox(-0.01, 0.01), 0.0026},
  };
}

CheckResult check_counterexamples(const WeightsFn& weights) {
  Stopwatch clock;
  CheckResult r{"counterexamples", true, {}, 0.0};
  for (const auto& ce : reference_counterexamples()) {
    const auto v = estimand_value(weights(ce.estimand, ce.model), theta_of(ce.model));
    // Agreement to six decimal places.
    const bool ok = std::abs(v.raw_contrast - ce.expected_raw_contrast) < 0.5e-6;
    const bool sign_ok = std::signbit(v.normalized) == std::signbit(v.raw_contrast);
    r.passed = r.passed && ok && sign_ok;
    r.detail += fmt::format("{}: {} raw {:.6f} (expected {:.6f}), normalized {:.6f}{}; ", ce.label,
                            to_string(ce.estimand), v.raw_contrast, ce.expected_raw_contrast, v.normalized,
                            ok && sign_ok ? "" : " MISMATCH");
  }
  r.seconds = clock.seconds();
  return r;
}

CheckResult check_sign_consistency(std::uint64_t seed, std::size_t draws, const WeightsFn& weights) {
  Stopwatch clock;
  Rng rng(seed);
  const ModelSampler sampler;
  constexpr double tol = 1e-12;
  std::size_t nonneg = 0, nonpos = 0, violations = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto m = sampler(rng);
    const double bm = m.beta_m();
    const double by = m.beta_y();
    const double ate = value_of(Estimand::ate, m, weights);
    const double att = value_of(Estimand::att, m, weights);
    if (bm >= 0.0 && by >= 0.0) {
      ++nonneg;
      if (ate < -tol || att < -tol) ++violations;
    }
    if (bm <= 0.0 && by <= 0.0) {
      ++nonpos;
      if (ate > tol || att > tol) ++violations;
    }
  }
  return {"sign-consistency", violations == 0,
          fmt::format("{} draws, {} with both effects >= 0, {} with both <= 0, {} violations", draws, nonneg, nonpos,
                      violations),
          clock.seconds()};
}

CheckResult check_paradox_existence(std::uint64_t seed, std::size_t draws, const WeightsFn& weights) {
  Stopwatch clock;
  Rng rng(seed);
  const ModelSampler sampler;
  std::size_t ate_flips = 0, att_flips = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto m = sampler(rng);
    const double bm = m.beta_m();
    const double by = m.beta_y();
    if (bm > 0.0 && by > 0.0 && value_of(Estimand::ate_m1, m, weights) < 0.0) ++ate_flips;
    if (bm < 0.0 && by < 0.0 && value_of(Estimand::att_m1, m, weights) > 0.0) ++att_flips;
  }
  return {"paradox-existence", ate_flips > 0 && att_flips > 0,
          fmt::format("{} draws: {} with beta_M, beta_Y > 0 and ATE_M1 < 0; {} with beta_M, beta_Y < 0 and ATT_M1 > 0",
                      draws, ate_flips, att_flips),
          clock.seconds()};
}

CheckResult check_decomposition(std::uint64_t seed, std::size_t draws, const WeightsFn& weights) {
  Stopwatch clock;
  Rng rng(seed);
  const ModelSampler sampler;
  double worst = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto m = sampler(rng);
    const auto [pie, pde] = pie_pde(m);
    worst = std::max(worst, std::abs(pie + pde - value_of(Estimand::ate, m, weights)));
  }
  return {"pie-plus-pde", worst <= 1e-12, fmt::format("{} draws, max |PIE + PDE - ATE| = {:.3g}", draws, worst),
          clock.seconds()};
}

CheckResult check_oracle_agreement(std::uint64_t seed, std::size_t models, std::size_t rows, double z,
                                   unsigned threads, const WeightsFn& weights) {
  Stopwatch clock;
  Rng rng(seed);
  const ModelSampler sampler{0.05, 0.95, 2, false};
  std::size_t comparisons = 0, failures = 0;
  double worst_z = 0.0;
  std::string first_failure;

  for (std::size_t i = 0; i < models; ++i) {
    const auto m = sampler(rng);
    const auto table = sample_encounters(m, rows, derive_seed(seed, i), {"all", threads});
    const auto oracle = oracle_estimands(table);
    const std::array<std::pair<const char*, std::pair<double, OracleField>>, 9> fields = {{
        {"ATE", {value_of(Estimand::ate, m, weights), oracle.ate}},
        {"ATT", {value_of(Estimand::att, m, weights), oracle.att}},
        {"ATE_M1", {value_of(Estimand::ate_m1, m, weights), oracle.ate_m1}},
        {"ATT_M1", {value_of(Estimand::att_m1, m, weights), oracle.att_m1}},
        {"PIE", {pie_pde(m).pie, oracle.pie}},
        {"PDE", {pie_pde(m).pde, oracle.pde}},
        {"CRR", {crr_true(m), oracle.crr}},
        {"naive RR", {naive_rr_true(m), oracle.naive_rr}},
        {"naive RD", {naive_rd_true(m), oracle.naive_rd}},
    }};
    for (const auto& [name, pair] : fields) {
      const auto& [closed, mc] = pair;
      ++comparisons;
      bool ok = mc.defined();
      double score = 0.0;
      if (ok) {
        const double diff = std::abs(*mc.value - closed);
        score = mc.se > 0.0 ? diff / mc.se : (diff <= 1e-12 ? 0.0 : INFINITY);
        ok = score <= z;
      }
      worst_z = std::max(worst_z, score);
      if (!ok) {
        ++failures;
        if (first_failure.empty()) {
          first_failure = fmt::format("; first failure: model {} {} closed {:.6g} oracle {} se {:.3g}", i, name,
                                      closed, mc.value ? fmt::format("{:.6g}", *mc.value) : "undefined", mc.se);
        }
      }
    }
  }
  return {"oracle-agreement", failures == 0,
          fmt::format("{} models x {} rows, {} comparisons within {} SE: {} failures, max |z| = {:.2f}{}", models,
                      rows, comparisons, z, failures, worst_z, first_failure),
          clock.seconds()};
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  const WeightsFn weights = options.inject_fault ? WeightsFn(perturbed_weights_of) : WeightsFn(weights_of);
  std::vector<CheckResult> out;
  out.push_back(check_counterexamples(weights));
  out.push_back(check_sign_consistency(derive_seed(options.seed, 1), options.sign_draws, weights));
  out.push_back(check_paradox_existence(derive_seed(options.seed, 2), options.sign_draws, weights));
  out.push_back(check_decomposition(derive_seed(options.seed, 3), options.sign_draws, weights));
  out.push_back(check_oracle_agreement(derive_seed(options.seed, 4), options.oracle_models, options.oracle_rows,
                                       options.oracle_z, options.threads, weights));
  return out;
}

}  // namespace crr
