#pragma once

// CSV loaders for administrative records, census counts, and survey
// microdata. Column names, the race mapping, and stratum construction come
// from a JSON config; nothing dataset-specific is hard-coded.
//
// Config layout (every section optional except where a loader needs it):
//
//   {
//     "administrative": {
//       "race_column": "race",  "race_map": {"BLACK": 1, "WHITE": 0},
//       "force_column": "force", "force_map": {"1": 1, "0": 0},
//       "strata_columns": ["precinct"], "stratum_separator": "|",
//       "on_bad_row": "error"            // or "skip"
//     },
//     "census": {"stratum_column": "stratum", "minority_column": "count_d1",
//                "majority_column": "count_d0"},
//     "survey": {
//       "race_column": "race", "race_map": {"1": 1, "0": 0},
//       "stop_public_column": "V11", "stop_vehicle_column": "V13",
//       "stop_other_column": "V21", "contacts_column": "V30",
//       "region_column": "metro", "region_values": ["1"],
//       "weight_column": "", "strata_columns": [],
//       "yes_values": ["1"], "no_values": ["0", "2"]
//     }
//   }

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crr/data.hpp"

namespace crr {

struct AdministrativeSchema {
  std::string race_column = "race";
  std::map<std::string, int, std::less<>> race_map;  // mandatory
  std::string force_column = "force";
  std::map<std::string, int, std::less<>> force_map = {{"0", 0}, {"1", 1}};
  std::vector<std::string> strata_columns;
  std::string stratum_separator = "|";
  bool skip_bad_rows = false;
};

struct CensusSchema {
  std::string stratum_column = "stratum";
  std::string minority_column = "count_d1";
  std::string majority_column = "count_d0";
};

struct SurveySchema {
  std::string race_column = "race";
  std::map<std::string, int, std::less<>> race_map = {{"0", 0}, {"1", 1}};
  std::string stop_public_column = "V11";
  std::string stop_vehicle_column = "V13";
  std::string stop_other_column = "V21";
  std::string contacts_column = "V30";
  std::string region_column = "large_metro";
  std::vector<std::string> region_values = {"1"};
  std::string weight_column;  // empty: every respondent weighs 1
  std::vector<std::string> strata_columns;
  std::string stratum_separator = "|";
  std::vector<std::string> yes_values = {"1"};
  std::vector<std::string> no_values = {"0", "2"};
};

struct DataConfig {
  AdministrativeSchema administrative;
  CensusSchema census;
  SurveySchema survey;
};

DataConfig config_from_json(std::string_view json_text);
DataConfig load_config(const std::string& path);

/// Row accounting: loaded + dropped + unparseable == physical_rows. Blank
/// lines are not rows.
struct LoadReport {
  std::size_t physical_rows = 0;
  std::size_t loaded = 0;
  std::size_t dropped = 0;
  std::size_t unparseable = 0;
  std::map<std::string, std::size_t> dropped_values;  // unmapped race value -> rows
};

struct AdministrativeLoad {
  AdministrativeDataset data;
  LoadReport report;
};

AdministrativeLoad read_administrative(std::istream& in, const AdministrativeSchema& schema);
AdministrativeLoad load_administrative(const std::string& path, const AdministrativeSchema& schema);

struct CensusLoad {
  ExternalRaceDistribution distribution{SourceKind::census_fixed, "census"};
  LoadReport report;
  /// Strata with zero recorded population; their share is undefined.
  std::vector<std::string> undefined_strata;
};

CensusLoad read_census(std::istream& in, const CensusSchema& schema = {});
CensusLoad load_census(const std::string& path, const CensusSchema& schema = {});

struct SurveyRespondentRow {
  std::uint8_t race = 0;
  std::optional<bool> stop_public;   // V11
  std::optional<bool> stop_vehicle;  // V13
  std::optional<bool> stop_other;    // V21
  std::optional<double> contacts;    // V30
  std::optional<bool> large_metro;
  double weight = 1.0;
  std::string stratum{kAnyStratum};
};

struct SurveyLoad {
  std::vector<SurveyRespondentRow> rows;
  LoadReport report;
};

SurveyLoad read_survey(std::istream& in, const SurveySchema& schema = {});
SurveyLoad load_survey(const std::string& path, const SurveySchema& schema = {});

enum class SurveyMode { all, mv_stop, stop_in_public, large_metro, weighted, weighted_large_metro };

std::string_view to_string(SurveyMode mode);
SurveyMode parse_survey_mode(std::string_view text);

/// Respondents above this many reported contacts are dropped in the
/// contact-weighted modes.
inline constexpr double kMaxContacts = 30.0;

/// Encounter race distribution from survey respondents.
///
///   all                   every respondent, schema weight
///   mv-stop               stop_vehicle = 1
///   stop-in-public        stop_public = 1 or stop_other = 1
///   large-metro           large_metro = 1
///   weighted              weight = contacts, contacts > 30 removed
///   weighted-large-metro  both of the above
///
/// A respondent missing any item a mode reads is excluded from that mode.
/// Throws Error{EmptySubset} when no respondent (or no weight) remains.
ExternalRaceDistribution derive_survey_distribution(std::span<const SurveyRespondentRow> rows, SurveyMode mode);

}  // namespace crr
