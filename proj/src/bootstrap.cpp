#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "crr/estimator.hpp"

namespace crr {

namespace {

// Scratch buffers reused across the replicates one worker runs.
struct Workspace {
  std::vector<std::uint32_t> row_counts;
  std::vector<std::uint32_t> respondent_counts;
  std::vector<double> effective_weights;
};

void draw_multiplicities(Rng& rng, std::size_t n, std::vector<std::uint32_t>& counts) {
  counts.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
}

struct ReplicateInputs {
  Statistic statistic;
  const StratumSample& sample;
  const ExternalRaceDistribution* external;
  const ExternalRaceDistribution::Entry* entry;  // null when the statistic ignores the external source
  bool resample_external;
  EstimationOptions estimation;
};

std::optional<double> run_replicate(const ReplicateInputs& in, std::uint64_t seed, Workspace& ws) {
  Rng rng(seed);
  draw_multiplicities(rng, in.sample.size(), ws.row_counts);
  const auto tally = kernels::tally_weighted(ws.row_counts, in.sample.d, in.sample.y);

  std::optional<double> p1;
  if (in.entry != nullptr) {
    if (in.resample_external) {
      const std::size_t m = in.entry->d.size();
      draw_multiplicities(rng, m, ws.respondent_counts);
      ws.effective_weights.resize(m);
      for (std::size_t i = 0; i < m; ++i) ws.effective_weights[i] = ws.respondent_counts[i] * in.entry->w[i];
      const auto share = weighted_minority_share(ws.effective_weights, in.entry->d);
      if (!share) return std::nullopt;
      p1 = in.external->mix(*share);
    } else {
      if (!in.entry->base_p1) return std::nullopt;
      p1 = in.external->mix(*in.entry->base_p1);
    }
  }

  try {
    const double v = evaluate(in.statistic, group_counts(tally, in.estimation), p1);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

EstimateWithCI bootstrap(Statistic statistic, const StratumSample& sample, const ExternalRaceDistribution* external,
                         std::string_view x, const BootstrapOptions& options) {
  if (options.replicates < 2) throw Error(ErrorKind::InvalidArgument, "bootstrap needs at least 2 replicates");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("confidence level {} is outside (0, 1)", options.level));
  }
  if (sample.size() == 0) throw Error(ErrorKind::InvalidArgument, fmt::format("stratum '{}' is empty", x));

  const EstimationOptions estimation{options.haldane};
  const ExternalRaceDistribution::Entry* entry = nullptr;
  std::optional<double> point_p1;
  if (needs_external(statistic)) {
    if (external == nullptr) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("{} needs an external race distribution", to_string(statistic)));
    }
    point_p1 = external->p1(x);
    entry = external->find(x);
  }

  EstimateWithCI out;
  out.point = evaluate(statistic, group_counts(sample, estimation), point_p1);
  out.level = options.level;
  out.replicates = options.replicates;
  out.seed = options.seed;

  const ReplicateInputs inputs{statistic, sample, external, entry,
                               external != nullptr && external->kind() == SourceKind::survey_resampled,
                               estimation};

  std::vector<std::optional<double>> results(options.replicates);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.replicates)));
  auto work = [&](unsigned w) {
    Workspace ws;
    for (std::size_t b = w; b < options.replicates; b += workers) {
      results[b] = run_replicate(inputs, derive_seed(options.seed, b), ws);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  std::vector<double> values;
  values.reserve(results.size());
  for (const auto& r : results) {
    if (r) values.push_back(*r);
  }
  out.undefined_replicates = results.size() - values.size();
  if (2 * out.undefined_replicates > results.size()) {
    throw Error(ErrorKind::TooManyUndefined,
                fmt::format("{} of {} bootstrap replicates undefined in stratum '{}'", out.undefined_replicates,
                            results.size(), x));
  }
  std::sort(values.begin(), values.end());
  const double alpha = 1.0 - options.level;
  out.lo = quantile_sorted(values, alpha / 2.0);
  out.hi = quantile_sorted(values, 1.0 - alpha / 2.0);
  return out;
}

EstimateWithCI bootstrap(Statistic statistic, const AdministrativeDataset& data,
                         const ExternalRaceDistribution* external, std::string_view x,
                         const BootstrapOptions& options) {
  return bootstrap(statistic, data.sample(x), external, x, options);
}

MaybeEstimate try_bootstrap(Statistic statistic, const AdministrativeDataset& data,
                            const ExternalRaceDistribution* external, std::string_view x,
                            const BootstrapOptions& options) {
  MaybeEstimate out;
  try {
    out.estimate = bootstrap(statistic, data, external, x, options);
  } catch (const Error& e) {
    out.error = e.kind();
    out.reason = e.what();
  }
  return out;
}

std::vector<StratumEstimates> stratified_estimates(const AdministrativeDataset& data,
                                                   const ExternalRaceDistribution* external,
                                                   const std::vector<std::string>& strata,
                                                   const BootstrapOptions& options) {
  for (const auto& key : strata) {
    if (!data.has_stratum(key)) {
      throw Error(ErrorKind::UnknownStratum, fmt::format("stratum '{}' has no administrative rows", key));
    }
  }
  std::vector<StratumEstimates> rows;
  rows.reserve(strata.size());
  for (const auto& key : strata) {
    StratumEstimates row;
    row.stratum = key;
    row.naive = try_bootstrap(Statistic::naive_rr, data, nullptr, key, options);
    if (external != nullptr) row.adjusted = try_bootstrap(Statistic::crr, data, external, key, options);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace crr
