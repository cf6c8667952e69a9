#include "crr/estimator.hpp"

#include <cmath>

#include <fmt/format.h>

namespace crr {

namespace {

void require_groups(const GroupCounts& g) {
  if (!(g.n1 > 0.0)) throw Error(ErrorKind::MissingGroup, "no minority-race rows in stratum");
  if (!(g.n0 > 0.0)) throw Error(ErrorKind::MissingGroup, "no majority-race rows in stratum");
}

double odds(double p) { return p / (1.0 - p); }

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

}  // namespace

GroupCounts group_counts(const kernels::CellTally& t, const EstimationOptions& options) {
  GroupCounts g;
  g.n1 = static_cast<double>(t.minority);
  g.n0 = static_cast<double>(t.total - t.minority);
  g.y1 = static_cast<double>(t.minority_force);
  g.y0 = static_cast<double>(t.force - t.minority_force);
  if (options.haldane) {
    g.n1 += 1.0;
    g.n0 += 1.0;
    g.y1 += 0.5;
    g.y0 += 0.5;
  }
  return g;
}

GroupCounts group_counts(const StratumSample& sample, const EstimationOptions& options) {
  return group_counts(kernels::tally(sample.d, sample.y), options);
}

double naive_risk_difference(const GroupCounts& g) {
  require_groups(g);
  return g.y1 / g.n1 - g.y0 / g.n0;
}

double naive_risk_ratio(const GroupCounts& g) {
  require_groups(g);
  if (!(g.y0 > 0.0)) throw Error(ErrorKind::ZeroDenominator, "majority-race force rate is zero");
  return (g.y1 / g.n1) / (g.y0 / g.n0);
}

double bias_factor_from_shares(double p_minority_detained, double p_minority_encounter) {
  if (!open_unit(p_minority_detained)) {
    throw Error(ErrorKind::DegenerateOdds,
                fmt::format("minority share among detainments is {}", p_minority_detained));
  }
  if (!open_unit(p_minority_encounter)) {
    throw Error(ErrorKind::DegenerateOdds,
                fmt::format("minority share among encounters is {}", p_minority_encounter));
  }
  return odds(p_minority_detained) / odds(p_minority_encounter);
}

double bias_factor(const GroupCounts& g, double external_p1) {
  const double total = g.n1 + g.n0;
  if (!(total > 0.0)) throw Error(ErrorKind::DegenerateOdds, "stratum has no administrative rows");
  return bias_factor_from_shares(g.n1 / total, external_p1);
}

double crr_identified(const GroupCounts& g, double external_p1) {
  const double rr = naive_risk_ratio(g);
  return rr * bias_factor(g, external_p1);
}

double naive_risk_difference(const AdministrativeDataset& data, std::string_view x,
                             const EstimationOptions& options) {
  return naive_risk_difference(group_counts(data.sample(x), options));
}

double naive_risk_ratio(const AdministrativeDataset& data, std::string_view x, const EstimationOptions& options) {
  return naive_risk_ratio(group_counts(data.sample(x), options));
}

double bias_factor(const AdministrativeDataset& data, const ExternalRaceDistribution& external, std::string_view x,
                   const EstimationOptions& options) {
  return bias_factor(group_counts(data.sample(x), options), external.p1(x));
}

double crr_identified(const AdministrativeDataset& data, const ExternalRaceDistribution& external,
                      std::string_view x, const EstimationOptions& options) {
  return crr_identified(group_counts(data.sample(x), options), external.p1(x));
}

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::naive_rd: return "naive_rd";
    case Statistic::naive_rr: return "naive_rr";
    case Statistic::bias_factor: return "bias_factor";
    case Statistic::crr: return "crr";
  }
  return "?";
}

bool needs_external(Statistic s) { return s == Statistic::bias_factor || s == Statistic::crr; }

double evaluate(Statistic s, const GroupCounts& g, std::optional<double> external_p1) {
  if (needs_external(s) && !external_p1) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("{} needs an external race distribution", to_string(s)));
  }
  switch (s) {
    case Statistic::naive_rd: return naive_risk_difference(g);
    case Statistic::naive_rr: return naive_risk_ratio(g);
    case Statistic::bias_factor: return bias_factor(g, *external_p1);
    case Statistic::crr: return crr_identified(g, *external_p1);
  }
  return 0.0;
}

ExternalRaceDistribution sensitivity_mixture(const ExternalRaceDistribution& external, double citywide_p1,
                                             double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("mixing weight {} is outside [0, 1]", lambda));
  }
  if (!open_unit(citywide_p1)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("citywide share {} is outside (0, 1)", citywide_p1));
  }
  ExternalRaceDistribution out = external;
  out.push_mixture({lambda, citywide_p1});
  return out;
}

}  // namespace crr
