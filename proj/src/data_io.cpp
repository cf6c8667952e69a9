#include "crr/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "crr/csv.hpp"
#include "crr/errors.hpp"

namespace crr {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IOFailure, fmt::format("cannot open '{}'", path));
  return in;
}

template <typename T>
void read_string(const json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

std::map<std::string, int, std::less<>> read_flag_map(const json& obj, const char* key) {
  std::map<std::string, int, std::less<>> out;
  for (const auto& [k, v] : obj.at(key).items()) {
    const int flag = v.get<int>();
    if (flag != 0 && flag != 1) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("{}: value for '{}' must be 0 or 1", key, k));
    }
    out.emplace(k, flag);
  }
  return out;
}

// Data rows of a CSV stream with the header resolved up front.
class Table {
 public:
  explicit Table(std::istream& in) : reader_(in) {
    auto header = reader_.next();
    if (!header) throw Error(ErrorKind::MissingColumn, "input has no header row");
    header_ = std::move(header->fields);
    if (!header_.empty() && header_[0].starts_with("\xEF\xBB\xBF")) header_[0].erase(0, 3);
  }

  std::size_t require(std::string_view column) const {
    const auto idx = csv::column_index(header_, column);
    if (!idx) throw Error(ErrorKind::MissingColumn, fmt::format("column '{}' not found in header", column));
    return *idx;
  }

  // Absent item columns read as missing values.
  std::optional<std::size_t> optional_column(std::string_view column) const {
    if (column.empty()) return std::nullopt;
    return csv::column_index(header_, column);
  }

  /// Next non-blank record.
  std::optional<csv::Record> next() {
    while (auto rec = reader_.next()) {
      if (!csv::is_blank(*rec)) return rec;
    }
    return std::nullopt;
  }

  std::size_t width() const { return header_.size(); }

 private:
  csv::Reader reader_;
  std::vector<std::string> header_;
};

std::string stratum_key(const csv::Record& rec, const std::vector<std::size_t>& columns,
                        std::string_view separator, std::string_view fallback) {
  if (columns.empty()) return std::string(fallback);
  std::string key;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) key += separator;
    key += trim(rec.fields[columns[i]]);
  }
  return key;
}

std::optional<bool> parse_item(std::string_view raw, const SurveySchema& s) {
  const auto v = trim(raw);
  if (std::find(s.yes_values.begin(), s.yes_values.end(), v) != s.yes_values.end()) return true;
  if (std::find(s.no_values.begin(), s.no_values.end(), v) != s.no_values.end()) return false;
  return std::nullopt;
}

}  // namespace

DataConfig config_from_json(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("config is not valid JSON: {}", e.what()));
  }
  DataConfig cfg;
  try {
    if (root.contains("administrative")) {
      const auto& a = root.at("administrative");
      auto& s = cfg.administrative;
      read_string(a, "race_column", s.race_column);
      read_string(a, "force_column", s.force_column);
      read_string(a, "strata_columns", s.strata_columns);
      read_string(a, "stratum_separator", s.stratum_separator);
      if (a.contains("race_map")) s.race_map = read_flag_map(a, "race_map");
      if (a.contains("force_map")) s.force_map = read_flag_map(a, "force_map");
      if (a.contains("on_bad_row")) {
        const auto mode = a.at("on_bad_row").get<std::string>();
        if (mode != "error" && mode != "skip") {
          throw Error(ErrorKind::InvalidArgument, fmt::format("on_bad_row must be 'error' or 'skip', got '{}'", mode));
        }
        s.skip_bad_rows = mode == "skip";
      }
    }
    if (root.contains("census")) {
      const auto& c = root.at("census");
      read_string(c, "stratum_column", cfg.census.stratum_column);
      read_string(c, "minority_column", cfg.census.minority_column);
      read_string(c, "majority_column", cfg.census.majority_column);
    }
    if (root.contains("survey")) {
      const auto& v = root.at("survey");
      auto& s = cfg.survey;
      read_string(v, "race_column", s.race_column);
      if (v.contains("race_map")) s.race_map = read_flag_map(v, "race_map");
      read_string(v, "stop_public_column", s.stop_public_column);
      read_string(v, "stop_vehicle_column", s.stop_vehicle_column);
      read_string(v, "stop_other_column", s.stop_other_column);
      read_string(v, "contacts_column", s.contacts_column);
      read_string(v, "region_column", s.region_column);
      read_string(v, "region_values", s.region_values);
      read_string(v, "weight_column", s.weight_column);
      read_string(v, "strata_columns", s.strata_columns);
      read_string(v, "stratum_separator", s.stratum_separator);
      read_string(v, "yes_values", s.yes_values);
      read_string(v, "no_values", s.no_values);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("config has a malformed field: {}", e.what()));
  }
  return cfg;
}

DataConfig load_config(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

AdministrativeLoad read_administrative(std::istream& in, const AdministrativeSchema& schema) {
  if (schema.race_map.empty()) {
    throw Error(ErrorKind::InvalidArgument, "administrative race_map is required (e.g. {\"BLACK\": 1, \"WHITE\": 0})");
  }
  Table table(in);
  const std::size_t race_col = table.require(schema.race_column);
  const std::size_t force_col = table.require(schema.force_column);
  std::vector<std::size_t> strata_cols;
  for (const auto& c : schema.strata_columns) strata_cols.push_back(table.require(c));

  AdministrativeLoad out;
  auto& rep = out.report;
  while (auto rec = table.next()) {
    ++rep.physical_rows;
    try {
      if (rec->fields.size() != table.width()) {
        throw Error(ErrorKind::UnparseableRow, fmt::format("line {}: expected {} fields, found {}", rec->line,
                                                           table.width(), rec->fields.size()));
      }
      const auto force_raw = trim(rec->fields[force_col]);
      const auto force = schema.force_map.find(force_raw);
      if (force == schema.force_map.end()) {
        throw Error(ErrorKind::UnparseableRow,
                    fmt::format("line {}: force value '{}' is not in force_map", rec->line, force_raw));
      }
      const auto race_raw = trim(rec->fields[race_col]);
      const auto race = schema.race_map.find(race_raw);
      if (race == schema.race_map.end()) {
        ++rep.dropped;
        ++rep.dropped_values[std::string(race_raw)];
        continue;
      }
      out.data.add(static_cast<std::uint8_t>(race->second), static_cast<std::uint8_t>(force->second),
                   stratum_key(*rec, strata_cols, schema.stratum_separator, "all"));
      ++rep.loaded;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnparseableRow || !schema.skip_bad_rows) throw;
      ++rep.unparseable;
    }
  }
  return out;
}

AdministrativeLoad load_administrative(const std::string& path, const AdministrativeSchema& schema) {
  auto in = open_input(path);
  return read_administrative(in, schema);
}

CensusLoad read_census(std::istream& in, const CensusSchema& schema) {
  Table table(in);
  const std::size_t key_col = table.require(schema.stratum_column);
  const std::size_t d1_col = table.require(schema.minority_column);
  const std::size_t d0_col = table.require(schema.majority_column);

  CensusLoad out;
  while (auto rec = table.next()) {
    ++out.report.physical_rows;
    if (rec->fields.size() != table.width()) {
      throw Error(ErrorKind::UnparseableRow, fmt::format("line {}: expected {} fields, found {}", rec->line,
                                                         table.width(), rec->fields.size()));
    }
    const auto d1 = parse_number(rec->fields[d1_col]);
    const auto d0 = parse_number(rec->fields[d0_col]);
    if (!d1 || !d0 || !std::isfinite(*d1) || !std::isfinite(*d0)) {
      throw Error(ErrorKind::UnparseableRow, fmt::format("line {}: counts must be finite numbers", rec->line));
    }
    if (*d1 < 0.0 || *d0 < 0.0) {
      throw Error(ErrorKind::NegativeCount, fmt::format("line {}: negative population count", rec->line));
    }
    std::string key(trim(rec->fields[key_col]));
    if (*d1 + *d0 == 0.0) out.undefined_strata.push_back(key);
    out.distribution.set_census_counts(std::move(key), *d1, *d0);
    ++out.report.loaded;
  }
  return out;
}

CensusLoad load_census(const std::string& path, const CensusSchema& schema) {
  auto in = open_input(path);
  return read_census(in, schema);
}

SurveyLoad read_survey(std::istream& in, const SurveySchema& schema) {
  Table table(in);
  const std::size_t race_col = table.require(schema.race_column);
  const auto public_col = table.optional_column(schema.stop_public_column);
  const auto vehicle_col = table.optional_column(schema.stop_vehicle_column);
  const auto other_col = table.optional_column(schema.stop_other_column);
  const auto contacts_col = table.optional_column(schema.contacts_column);
  std::optional<std::size_t> weight_col;
  if (!schema.weight_column.empty()) weight_col = table.require(schema.weight_column);
  const auto region_col = table.optional_column(schema.region_column);
  std::vector<std::size_t> strata_cols;
  for (const auto& c : schema.strata_columns) strata_cols.push_back(table.require(c));

  SurveyLoad out;
  auto& rep = out.report;
  while (auto rec = table.next()) {
    ++rep.physical_rows;
    if (rec->fields.size() != table.width()) {
      ++rep.unparseable;
      continue;
    }
    const auto& f = rec->fields;
    const auto race_raw = trim(f[race_col]);
    const auto race = schema.race_map.find(race_raw);
    if (race == schema.race_map.end()) {
      ++rep.dropped;
      ++rep.dropped_values[std::string(race_raw)];
      continue;
    }
    SurveyRespondentRow row;
    row.race = static_cast<std::uint8_t>(race->second);
    if (public_col) row.stop_public = parse_item(f[*public_col], schema);
    if (vehicle_col) row.stop_vehicle = parse_item(f[*vehicle_col], schema);
    if (other_col) row.stop_other = parse_item(f[*other_col], schema);
    if (contacts_col) {
      row.contacts = parse_number(f[*contacts_col]);
      if (row.contacts && (!std::isfinite(*row.contacts) || *row.contacts < 0.0)) row.contacts.reset();
    }
    if (region_col) {
      const auto v = trim(f[*region_col]);
      if (!v.empty()) {
        row.large_metro =
            std::find(schema.region_values.begin(), schema.region_values.end(), v) != schema.region_values.end();
      }
    }
    if (weight_col) {
      const auto w = parse_number(f[*weight_col]);
      if (!w || !std::isfinite(*w) || *w < 0.0) {
        ++rep.unparseable;
        continue;
      }
      row.weight = *w;
    }
    row.stratum = stratum_key(*rec, strata_cols, schema.stratum_separator, kAnyStratum);
    out.rows.push_back(std::move(row));
    ++rep.loaded;
  }
  return out;
}

SurveyLoad load_survey(const std::string& path, const SurveySchema& schema) {
  auto in = open_input(path);
  return read_survey(in, schema);
}

std::string_view to_string(SurveyMode mode) {
  switch (mode) {
    case SurveyMode::all: return "all";
    case SurveyMode::mv_stop: return "mv-stop";
    case SurveyMode::stop_in_public: return "stop-in-public";
    case SurveyMode::large_metro: return "large-metro";
    case SurveyMode::weighted: return "weighted";
    case SurveyMode::weighted_large_metro: return "weighted-large-metro";
  }
  return "?";
}

SurveyMode parse_survey_mode(std::string_view text) {
  for (auto mode : {SurveyMode::all, SurveyMode::mv_stop, SurveyMode::stop_in_public, SurveyMode::large_metro,
                    SurveyMode::weighted, SurveyMode::weighted_large_metro}) {
    if (to_string(mode) == text) return mode;
  }
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown survey mode '{}'", text));
}

ExternalRaceDistribution derive_survey_distribution(std::span<const SurveyRespondentRow> rows, SurveyMode mode) {
  const bool weighted = mode == SurveyMode::weighted || mode == SurveyMode::weighted_large_metro;
  const bool metro = mode == SurveyMode::large_metro || mode == SurveyMode::weighted_large_metro;

  ExternalRaceDistribution out(SourceKind::survey_resampled, fmt::format("survey:{}", to_string(mode)));
  std::size_t kept = 0;
  for (const auto& r : rows) {
    double weight = r.weight;
    switch (mode) {
      case SurveyMode::mv_stop:
        if (!r.stop_vehicle || !*r.stop_vehicle) continue;
        break;
      case SurveyMode::stop_in_public:
        if (!r.stop_public || !r.stop_other) continue;
        if (!*r.stop_public && !*r.stop_other) continue;
        break;
      default:
        break;
    }
    if (metro && (!r.large_metro || !*r.large_metro)) continue;
    if (weighted) {
      if (!r.contacts || *r.contacts > kMaxContacts) continue;
      weight = *r.contacts;
    }
    out.add_respondent(r.stratum, r.race, weight);
    ++kept;
  }
  if (kept == 0) {
    throw Error(ErrorKind::EmptySubset, fmt::format("no survey respondents selected by mode '{}'", to_string(mode)));
  }
  out.finalize();
  bool any_weight = false;
  for (const auto& [key, e] : out.entries()) any_weight = any_weight || e.base_p1.has_value();
  if (!any_weight) {
    throw Error(ErrorKind::EmptySubset,
                fmt::format("survey respondents selected by mode '{}' carry zero total weight", to_string(mode)));
  }
  return out;
}

}  // namespace crr
