#pragma once

// In-memory datasets consumed by the estimators.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace crr {

/// Race and force flags of one covariate cell, stored column-wise.
struct StratumSample {
  std::vector<std::uint8_t> d;
  std::vector<std::uint8_t> y;

  std::size_t size() const { return d.size(); }
};

/// Detained encounters only: every row is an M = 1 record.
class AdministrativeDataset {
 public:
  /// d and y must be 0 or 1.
  void add(std::uint8_t d, std::uint8_t y, std::string_view stratum);
  void reserve(std::size_t n);

  std::size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  std::span<const std::uint8_t> race() const { return d_; }
  std::span<const std::uint8_t> force() const { return y_; }
  std::span<const std::uint32_t> stratum_index() const { return x_; }

  /// Stratum keys in first-seen order.
  const std::vector<std::string>& strata() const { return keys_; }
  bool has_stratum(std::string_view key) const;

  /// Rows of one stratum. Throws Error{UnknownStratum}.
  StratumSample sample(std::string_view key) const;

  /// Same rows, every one relabeled to `key`.
  AdministrativeDataset pooled(std::string_view key = "all") const;

  friend bool operator==(const AdministrativeDataset& a, const AdministrativeDataset& b);

 private:
  std::vector<std::uint8_t> d_;
  std::vector<std::uint8_t> y_;
  std::vector<std::uint32_t> x_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

enum class SourceKind { census_fixed, survey_resampled };

std::string_view to_string(SourceKind kind);

/// p1' = lambda * p1 + (1 - lambda) * citywide_p1
struct MixtureStep {
  double lambda = 1.0;
  double citywide_p1 = 0.5;
};

/// Stratum key that matches any stratum without an entry of its own, used
/// for sources without geography (a national survey, a metro-wide census).
inline constexpr std::string_view kAnyStratum = "*";

/// External estimate of P(D = 1 | X = x) among encounters.
///
/// Census sources carry one fixed share per stratum. Survey sources keep
/// their respondents (race flag and nonnegative weight) so the bootstrap can
/// resample them; the share is the weighted minority fraction.
class ExternalRaceDistribution {
 public:
  struct Entry {
    /// Unmixed share; empty when the stratum has no population.
    std::optional<double> base_p1;
    /// Census counts behind base_p1, when the share came from counts.
    std::optional<std::pair<double, double>> counts;  // (minority, majority)
    /// Survey respondents (empty for census sources).
    std::vector<std::uint8_t> d;
    std::vector<double> w;
  };

  ExternalRaceDistribution() = default;
  ExternalRaceDistribution(SourceKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  SourceKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  void set_census_share(std::string key, std::optional<double> p1);
  /// p1 = minority / (minority + majority); undefined when both are zero.
  void set_census_counts(std::string key, double minority, double majority);
  void add_respondent(std::string_view key, std::uint8_t d, double weight);
  /// Recomputes survey base shares from respondents. Called by loaders after
  /// the last add_respondent.
  void finalize();

  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }
  /// Entry for `key`, falling back to kAnyStratum. nullptr if neither exists.
  const Entry* find(std::string_view key) const;
  bool covers(std::string_view key) const { return find(key) != nullptr; }

  /// Mixed share for `key`. Throws Error{UnknownStratum} when not covered and
  /// Error{ZeroMass} when the stratum has no recorded population.
  double p1(std::string_view key) const;
  std::optional<double> try_p1(std::string_view key) const;

  /// Applies the mixture steps to an unmixed share.
  double mix(double base) const;
  const std::vector<MixtureStep>& mixtures() const { return mixtures_; }
  void push_mixture(MixtureStep step) { mixtures_.push_back(step); }

  /// Single-entry distribution keyed kAnyStratum: census counts summed, or
  /// respondents merged, across strata. Throws Error{InvalidArgument} for a
  /// multi-stratum census source given as bare shares.
  ExternalRaceDistribution pooled() const;

 private:
  SourceKind kind_ = SourceKind::census_fixed;
  std::string name_ = "external";
  std::map<std::string, Entry, std::less<>> entries_;
  std::vector<MixtureStep> mixtures_;
};

/// Weighted minority share of respondents, via the dispatched kernel.
std::optional<double> weighted_minority_share(std::span<const double> w, std::span<const std::uint8_t> d);

}  // namespace crr
