#pragma once

// Result tables shared by every CLI subcommand.
//
// csv and json-lines output follow schema "crr-report/1":
//   csv         `# key=value` header lines, then the columns
//               stratum,estimand,source,point,lo,hi,level,replicates,undefined_replicates,flags
//   json-lines  one {"type":"header",...} object, then one {"type":"row",...} object per row
// Undefined numbers are written as the token `undefined`; numbers that do not
// apply to a row (an interval on a closed-form value) as `na`.

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crr/estimator.hpp"

namespace crr {

inline constexpr std::string_view kReportSchema = "crr-report/1";
inline constexpr std::string_view kUndefinedToken = "undefined";
inline constexpr std::string_view kNotApplicableToken = "na";

enum class OutputFormat { table, csv, json_lines };

OutputFormat parse_output_format(std::string_view text);
std::string_view to_string(OutputFormat f);

struct ReportValue {
  enum class State { value, undefined, not_applicable };
  State state = State::not_applicable;
  double value = 0.0;

  static ReportValue of(double v) { return {State::value, v}; }
  static ReportValue undefined() { return {State::undefined, 0.0}; }
  static ReportValue na() { return {State::not_applicable, 0.0}; }
};

struct ReportRow {
  std::string stratum;
  std::string estimand;
  std::string source;
  ReportValue point;
  ReportValue lo;
  ReportValue hi;
  ReportValue level;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> undefined_replicates;
  std::vector<std::string> flags;
};

/// Row for a bootstrap result; undefined results carry the error kind as a flag.
ReportRow estimate_row(std::string stratum, std::string estimand, std::string source, const MaybeEstimate& m);
/// Row for a single closed-form or Monte Carlo number.
ReportRow scalar_row(std::string stratum, std::string estimand, std::string source, std::optional<double> value);

struct Report {
  std::string command;
  /// Settings echoed before the rows (seed, B, level, lambda, ...).
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<ReportRow> rows;
};

void write_report(const Report& report, OutputFormat format, std::ostream& out);

/// Shortest round-tripping decimal representation.
std::string format_number(double v);

}  // namespace crr
