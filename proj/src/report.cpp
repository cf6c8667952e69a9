#include "crr/report.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <json.hpp>

#include "crr/csv.hpp"
#include "crr/errors.hpp"

namespace crr {

namespace {

using json = nlohmann::ordered_json;

std::string render(const ReportValue& v) {
  switch (v.state) {
    case ReportValue::State::value: return format_number(v.value);
    case ReportValue::State::undefined: return std::string(kUndefinedToken);
    case ReportValue::State::not_applicable: return std::string(kNotApplicableToken);
  }
  return {};
}

json to_json(const ReportValue& v) {
  switch (v.state) {
    case ReportValue::State::value: return v.value;
    case ReportValue::State::undefined: return std::string(kUndefinedToken);
    case ReportValue::State::not_applicable: return std::string(kNotApplicableToken);
  }
  return nullptr;
}

std::string render_count(const std::optional<std::size_t>& c) {
  return c ? std::to_string(*c) : std::string(kNotApplicableToken);
}

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out.empty() ? "-" : out;
}

constexpr std::array<std::string_view, 10> kColumns = {
    "stratum", "estimand", "source", "point", "lo", "hi", "level", "replicates", "undefined_replicates", "flags"};

std::vector<std::string> cells(const ReportRow& r) {
  return {r.stratum,      r.estimand,  r.source,
          render(r.point), render(r.lo), render(r.hi),
          render(r.level), render_count(r.replicates), render_count(r.undefined_replicates),
          join_flags(r.flags)};
}

void write_csv(const Report& report, std::ostream& out) {
  out << "# schema=" << kReportSchema << '\n';
  out << "# command=" << report.command << '\n';
  for (const auto& [k, v] : report.settings) out << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const auto& row : report.rows) {
    const auto c = cells(row);
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << csv::escape(c[i]);
    out << '\n';
  }
}

void write_json_lines(const Report& report, std::ostream& out) {
  json header;
  header["type"] = "header";
  header["schema"] = kReportSchema;
  header["command"] = report.command;
  json settings = json::object();
  for (const auto& [k, v] : report.settings) settings[k] = v;
  header["settings"] = settings;
  out << header.dump() << '\n';
  for (const auto& r : report.rows) {
    json j;
    j["type"] = "row";
    j["stratum"] = r.stratum;
    j["estimand"] = r.estimand;
    j["source"] = r.source;
    j["point"] = to_json(r.point);
    j["lo"] = to_json(r.lo);
    j["hi"] = to_json(r.hi);
    j["level"] = to_json(r.level);
    j["replicates"] = r.replicates ? json(*r.replicates) : json(std::string(kNotApplicableToken));
    j["undefined_replicates"] =
        r.undefined_replicates ? json(*r.undefined_replicates) : json(std::string(kNotApplicableToken));
    j["flags"] = r.flags;
    out << j.dump() << '\n';
  }
}

void write_table(const Report& report, std::ostream& out) {
  out << "== " << report.command << " (" << kReportSchema << ")\n";
  for (const auto& [k, v] : report.settings) out << "   " << k << ": " << v << '\n';
  std::vector<std::vector<std::string>> grid;
  grid.emplace_back(kColumns.begin(), kColumns.end());
  for (const auto& r : report.rows) grid.push_back(cells(r));
  std::vector<std::size_t> width(kColumns.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i + 1 < line.size()) {
        out << fmt::format("{:<{}}", line[i], width[i]) << "  ";
      } else {
        out << line[i];
      }
    }
    out << '\n';
  }
}

}  // namespace

OutputFormat parse_output_format(std::string_view text) {
  if (text == "table") return OutputFormat::table;
  if (text == "csv") return OutputFormat::csv;
  if (text == "json-lines" || text == "jsonl") return OutputFormat::json_lines;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown output format '{}'", text));
}

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::table: return "table";
    case OutputFormat::csv: return "csv";
    case OutputFormat::json_lines: return "json-lines";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return fmt::format("{}", v);
  return std::string(buf, ptr);
}

ReportRow estimate_row(std::string stratum, std::string estimand, std::string source, const MaybeEstimate& m) {
  ReportRow r;
  r.stratum = std::move(stratum);
  r.estimand = std::move(estimand);
  r.source = std::move(source);
  if (m.estimate) {
    const auto& e = *m.estimate;
    r.point = ReportValue::of(e.point);
    r.lo = ReportValue::of(e.lo);
    r.hi = ReportValue::of(e.hi);
    r.level = ReportValue::of(e.level);
    r.replicates = e.replicates;
    r.undefined_replicates = e.undefined_replicates;
  } else {
    r.point = r.lo = r.hi = ReportValue::undefined();
    r.flags.push_back("undefined");
    if (m.error) r.flags.push_back(std::string(to_string(*m.error)));
  }
  return r;
}

ReportRow scalar_row(std::string stratum, std::string estimand, std::string source, std::optional<double> value) {
  ReportRow r;
  r.stratum = std::move(stratum);
  r.estimand = std::move(estimand);
  r.source = std::move(source);
  r.point = value ? ReportValue::of(*value) : ReportValue::undefined();
  if (!value) r.flags.push_back("undefined");
  return r;
}

void write_report(const Report& report, OutputFormat format, std::ostream& out) {
  switch (format) {
    case OutputFormat::table: write_table(report, out); break;
    case OutputFormat::csv: write_csv(report, out); break;
    case OutputFormat::json_lines: write_json_lines(report, out); break;
  }
}

}  // namespace crr
