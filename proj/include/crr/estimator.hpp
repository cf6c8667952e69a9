#pragma once

// Selection-adjusted causal risk ratio from detained-only records.
//
//   CRR(x) = naive RR(x) * bias factor(x)
//   naive RR(x)    = P(y | d=1, m=1, x) / P(y | d=0, m=1, x)
//   bias factor(x) = odds(d=1 | m=1, x) / odds(d=1 | x)
//
// The first two factors come from the administrative rows of stratum x; the
// encounter odds come from an external race distribution.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crr/data.hpp"
#include "crr/errors.hpp"
#include "crr/kernels.hpp"
#include "crr/rng.hpp"

namespace crr {

struct EstimationOptions {
  /// Adds 0.5 to each (race x force) cell before forming proportions.
  bool haldane = false;
};

/// Race-by-force cell counts of one stratum, after any Haldane correction.
struct GroupCounts {
  double n1 = 0.0;  // d = 1 rows
  double n0 = 0.0;  // d = 0 rows
  double y1 = 0.0;  // d = 1, y = 1
  double y0 = 0.0;  // d = 0, y = 1
};

GroupCounts group_counts(const kernels::CellTally& tally, const EstimationOptions& options = {});
GroupCounts group_counts(const StratumSample& sample, const EstimationOptions& options = {});

// Errors: MissingGroup when a race is absent, ZeroDenominator when the
// majority force rate is zero, DegenerateOdds when either odds is 0 or
// infinite.
double naive_risk_difference(const GroupCounts& g);
double naive_risk_ratio(const GroupCounts& g);
double bias_factor(const GroupCounts& g, double external_p1);
/// odds(p_detained) / odds(p_encounter).
double bias_factor_from_shares(double p_minority_detained, double p_minority_encounter);
double crr_identified(const GroupCounts& g, double external_p1);

double naive_risk_difference(const AdministrativeDataset& data, std::string_view x,
                             const EstimationOptions& options = {});
double naive_risk_ratio(const AdministrativeDataset& data, std::string_view x,
                        const EstimationOptions& options = {});
double bias_factor(const AdministrativeDataset& data, const ExternalRaceDistribution& external,
                   std::string_view x, const EstimationOptions& options = {});
double crr_identified(const AdministrativeDataset& data, const ExternalRaceDistribution& external,
                      std::string_view x, const EstimationOptions& options = {});

enum class Statistic { naive_rd, naive_rr, bias_factor, crr };

std::string_view to_string(Statistic s);
bool needs_external(Statistic s);

double evaluate(Statistic s, const GroupCounts& g, std::optional<double> external_p1);

struct BootstrapOptions {
  std::size_t replicates = 1000;
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  bool haldane = false;
};

struct EstimateWithCI {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t undefined_replicates = 0;
};

/// Linear-interpolation (type 7) sample quantile of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Nonparametric percentile bootstrap.
///
/// Each replicate resamples the stratum's administrative rows with
/// replacement and, for survey sources, the stratum's respondents. Census
/// shares are held fixed. Replicate b draws from derive_seed(seed, b), and
/// results are merged in replicate order, so any thread count gives the same
/// interval. Replicates whose statistic is undefined are excluded from the
/// percentiles and counted; more than half undefined throws
/// Error{TooManyUndefined}. An undefined point estimate throws its own error.
EstimateWithCI bootstrap(Statistic statistic, const AdministrativeDataset& data,
                         const ExternalRaceDistribution* external, std::string_view x,
                         const BootstrapOptions& options = {});

EstimateWithCI bootstrap(Statistic statistic, const StratumSample& sample,
                         const ExternalRaceDistribution* external, std::string_view x,
                         const BootstrapOptions& options = {});

/// Either an estimate or the reason it is undefined.
struct MaybeEstimate {
  std::optional<EstimateWithCI> estimate;
  std::optional<ErrorKind> error;
  std::string reason;

  bool defined() const { return estimate.has_value(); }
};

struct StratumEstimates {
  std::string stratum;
  MaybeEstimate naive;
  std::optional<MaybeEstimate> adjusted;  // present when an external source is given
};

/// One row per requested stratum, in request order. Throws
/// Error{UnknownStratum} if a stratum has no administrative rows; per-stratum
/// estimation failures are recorded in the row instead.
std::vector<StratumEstimates> stratified_estimates(const AdministrativeDataset& data,
                                                   const ExternalRaceDistribution* external,
                                                   const std::vector<std::string>& strata,
                                                   const BootstrapOptions& options = {});

MaybeEstimate try_bootstrap(Statistic statistic, const AdministrativeDataset& data,
                            const ExternalRaceDistribution* external, std::string_view x,
                            const BootstrapOptions& options);

/// Shrinks every stratum's encounter share toward a citywide share:
/// p1'(x) = lambda * p1(x) + (1 - lambda) * citywide_p1. Source kind is kept.
ExternalRaceDistribution sensitivity_mixture(const ExternalRaceDistribution& external, double citywide_p1,
                                             double lambda);

}  // namespace crr
