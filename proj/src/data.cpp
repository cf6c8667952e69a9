#include "crr/data.hpp"

#include <cmath>

#include <fmt/format.h>

#include "crr/errors.hpp"
#include "crr/kernels.hpp"

namespace crr {

void AdministrativeDataset::add(std::uint8_t d, std::uint8_t y, std::string_view stratum) {
  if (d > 1 || y > 1) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("race/force flags must be 0 or 1, got ({}, {})", d, y));
  }
  auto it = index_.find(std::string(stratum));
  if (it == index_.end()) {
    it = index_.emplace(std::string(stratum), static_cast<std::uint32_t>(keys_.size())).first;
    keys_.emplace_back(stratum);
  }
  d_.push_back(d);
  y_.push_back(y);
  x_.push_back(it->second);
}

void AdministrativeDataset::reserve(std::size_t n) {
  d_.reserve(n);
  y_.reserve(n);
  x_.reserve(n);
}

bool AdministrativeDataset::has_stratum(std::string_view key) const {
  return index_.find(std::string(key)) != index_.end();
}

StratumSample AdministrativeDataset::sample(std::string_view key) const {
  const auto it = index_.find(std::string(key));
  if (it == index_.end()) {
    throw Error(ErrorKind::UnknownStratum, fmt::format("stratum '{}' has no administrative rows", key));
  }
  StratumSample out;
  const std::uint32_t want = it->second;
  if (keys_.size() == 1) {
    out.d = d_;
    out.y = y_;
    return out;
  }
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (x_[i] != want) continue;
    out.d.push_back(d_[i]);
    out.y.push_back(y_[i]);
  }
  return out;
}

AdministrativeDataset AdministrativeDataset::pooled(std::string_view key) const {
  AdministrativeDataset out;
  out.d_ = d_;
  out.y_ = y_;
  out.x_.assign(d_.size(), 0);
  if (!d_.empty()) {
    out.keys_.emplace_back(key);
    out.index_.emplace(std::string(key), 0);
  }
  return out;
}

bool operator==(const AdministrativeDataset& a, const AdministrativeDataset& b) {
  if (a.d_ != b.d_ || a.y_ != b.y_ || a.keys_ != b.keys_) return false;
  return a.x_ == b.x_;
}

std::string_view to_string(SourceKind kind) {
  return kind == SourceKind::census_fixed ? "census-fixed" : "survey-resampled";
}

std::optional<double> weighted_minority_share(std::span<const double> w, std::span<const std::uint8_t> d) {
  const auto s = kernels::weighted_share(w, d);
  if (!(s.total > 0.0)) return std::nullopt;
  return s.minority / s.total;
}

void ExternalRaceDistribution::set_census_share(std::string key, std::optional<double> p1) {
  if (p1 && !(*p1 >= 0.0 && *p1 <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("share {} for stratum '{}' is outside [0, 1]", *p1, key));
  }
  auto& e = entries_[std::move(key)];
  e.base_p1 = p1;
  e.counts.reset();
}

void ExternalRaceDistribution::set_census_counts(std::string key, double minority, double majority) {
  if (!std::isfinite(minority) || !std::isfinite(majority)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("non-finite count in stratum '{}'", key));
  }
  if (minority < 0.0 || majority < 0.0) {
    throw Error(ErrorKind::NegativeCount, fmt::format("negative count in stratum '{}'", key));
  }
  auto& e = entries_[std::move(key)];
  e.counts = std::pair{minority, majority};
  const double total = minority + majority;
  e.base_p1 = total > 0.0 ? std::optional<double>(minority / total) : std::nullopt;
}

void ExternalRaceDistribution::add_respondent(std::string_view key, std::uint8_t d, double weight) {
  if (!std::isfinite(weight) || weight < 0.0) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("respondent weight {} must be finite and >= 0", weight));
  }
  if (d > 1) throw Error(ErrorKind::InvalidArgument, "race flag must be 0 or 1");
  auto it = entries_.find(key);
  if (it == entries_.end()) it = entries_.emplace(std::string(key), Entry{}).first;
  it->second.d.push_back(d);
  it->second.w.push_back(weight);
}

void ExternalRaceDistribution::finalize() {
  for (auto& [key, e] : entries_) {
    if (!e.d.empty()) e.base_p1 = weighted_minority_share(e.w, e.d);
  }
}

const ExternalRaceDistribution::Entry* ExternalRaceDistribution::find(std::string_view key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return &it->second;
  if (auto it = entries_.find(kAnyStratum); it != entries_.end()) return &it->second;
  return nullptr;
}

double ExternalRaceDistribution::mix(double base) const {
  double p = base;
  for (const auto& step : mixtures_) p = step.lambda * p + (1.0 - step.lambda) * step.citywide_p1;
  return p;
}

std::optional<double> ExternalRaceDistribution::try_p1(std::string_view key) const {
  const Entry* e = find(key);
  if (e == nullptr || !e->base_p1) return std::nullopt;
  return mix(*e->base_p1);
}

double ExternalRaceDistribution::p1(std::string_view key) const {
  const Entry* e = find(key);
  if (e == nullptr) {
    throw Error(ErrorKind::UnknownStratum, fmt::format("external source '{}' has no entry for stratum '{}'", name_, key));
  }
  if (!e->base_p1) {
    throw Error(ErrorKind::ZeroMass, fmt::format("external source '{}' records no population in stratum '{}'", name_, key));
  }
  return mix(*e->base_p1);
}

ExternalRaceDistribution ExternalRaceDistribution::pooled() const {
  ExternalRaceDistribution out(kind_, name_);
  out.mixtures_ = mixtures_;
  if (entries_.size() == 1) {
    Entry e = entries_.begin()->second;
    out.entries_.emplace(std::string(kAnyStratum), std::move(e));
    return out;
  }
  if (kind_ == SourceKind::survey_resampled) {
    for (const auto& [key, e] : entries_) {
      for (std::size_t i = 0; i < e.d.size(); ++i) out.add_respondent(kAnyStratum, e.d[i], e.w[i]);
    }
    out.finalize();
    return out;
  }
  double minority = 0.0;
  double majority = 0.0;
  for (const auto& [key, e] : entries_) {
    if (!e.counts) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("cannot pool census stratum '{}' given as a bare share", key));
    }
    minority += e.counts->first;
    majority += e.counts->second;
  }
  out.set_census_counts(std::string(kAnyStratum), minority, majority);
  return out;
}

}  // namespace crr
