#pragma once

// Monte Carlo encounters with full potential outcomes, and brute-force
// estimands computed by direct averaging over them.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crr/model.hpp"

namespace crr {

class AdministrativeDataset;

struct Encounter {
  std::uint8_t d = 0;
  Stratum s = Stratum::never;
  std::uint8_t m0 = 0;
  std::uint8_t m1 = 0;
  std::uint8_t y01 = 0;
  std::uint8_t y11 = 0;
  std::uint8_t m = 0;
  std::uint8_t y = 0;
  std::uint32_t x = 0;  // index into EncounterTable::strata

  /// Realized potential outcome Y(d') = Y(d', M(d')).
  std::uint8_t y_under(int race) const { return race == 1 ? (y11 & m1) : (y01 & m0); }
};

struct EncounterTable {
  std::vector<Encounter> rows;
  std::vector<std::string> strata{"all"};
  std::uint64_t seed = 0;
  PopulationModel model;

  const std::string& stratum_key(const Encounter& e) const { return strata[e.x]; }
};

struct SimulationOptions {
  std::string stratum = "all";
  unsigned threads = 1;
};

/// Rows are produced in shards of kShardRows, shard k drawing from
/// derive_seed(seed, k). Output is identical for every thread count.
inline constexpr std::size_t kShardRows = std::size_t{1} << 16;

EncounterTable sample_encounters(const PopulationModel& model, std::size_t n, std::uint64_t seed,
                                 const SimulationOptions& options = {});

/// Concatenates tables, re-indexing stratum keys. The model/seed of the
/// first table are kept.
EncounterTable concat(const std::vector<EncounterTable>& tables);

/// The detained (M = 1) rows, in order, projected to (d, y, x).
AdministrativeDataset to_administrative(const EncounterTable& table);

/// d, s, m0, m1, y01, y11, m, y, x
void write_encounters_csv(const EncounterTable& table, std::ostream& out);

/// A Monte Carlo quantity with its plug-in (or delta-method) standard error.
/// `value` is empty when a denominator is zero.
struct OracleField {
  std::optional<double> value;
  double se = 0.0;

  bool defined() const { return value.has_value(); }
};

struct OracleReport {
  std::uint64_t n = 0;
  OracleField ate;
  OracleField att;
  OracleField ate_m1;
  OracleField att_m1;
  OracleField pie;
  OracleField pde;
  /// mean(Y(1)) / mean(Y(0)) over realized potential outcomes.
  OracleField crr;
  /// mean(y | d = 1) / mean(y | d = 0) over all encounters, detained or not.
  OracleField crr_encounter;
  OracleField naive_rr;
  OracleField naive_rd;
  OracleField p_detained;
};

/// Computed from row counts only; never consults the model's formulas.
OracleReport oracle_estimands(const EncounterTable& table);

/// Row-pattern histogram over (d, m0, m1, y01, y11). Index bits:
/// d | m0 << 1 | m1 << 2 | y01 << 3 | y11 << 4.
using PatternCounts = std::array<std::uint64_t, 32>;
PatternCounts pattern_counts(const EncounterTable& table);
OracleReport oracle_estimands(const PatternCounts& counts);

/// Empirical bias factor on a realized table:
/// [#(d=1, m=1) / #(d=0, m=1)] / [#(d=1) / #(d=0)].
std::optional<double> empirical_bias_factor(const EncounterTable& table);

}  // namespace crr
