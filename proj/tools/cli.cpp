#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "crr/csv.hpp"
#include "crr/data_io.hpp"
#include "crr/errors.hpp"
#include "crr/estimator.hpp"
#include "crr/kernels.hpp"
#include "crr/model.hpp"
#include "crr/report.hpp"
#include "crr/simulator.hpp"
#include "crr/verify.hpp"

namespace crr::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunConfig {
  std::string config_path;
  std::string model_file;
  std::string admin;
  std::string census;
  std::string survey;
  std::string survey_mode = "all";
  std::string strata;
  std::uint64_t seed = kDefaultSeed;
  std::size_t bootstrap = 1000;
  double level = 0.95;
  double lambda = 0.9;
  double citywide_p1 = -1.0;  // negative: use the pooled census share
  std::string format = "table";
  bool haldane = false;
  std::size_t n = 100000;
  std::string out_dir = ".";
  std::string out;
  unsigned threads = 1;
  bool inject_fault = false;
  std::size_t sign_draws = 10000;
  std::size_t oracle_models = 100;
  std::size_t oracle_rows = 100000;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IOFailure, fmt::format("cannot open '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Values from the config file's "flags" object fill in options the command
// line left unset.
void apply_config_flags(const json& flags, CLI::App& sub, RunConfig& rc) {
  auto unset = [&](const std::string& name) {
    const auto* opt = sub.get_option_no_throw("--" + name);
    return opt != nullptr && opt->count() == 0;
  };
  auto str = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : flags.items()) {
    if (!unset(key)) continue;
    try {
      if (key == "model-file") rc.model_file = str(value);
      else if (key == "admin") rc.admin = str(value);
      else if (key == "census") rc.census = str(value);
      else if (key == "survey") rc.survey = str(value);
      else if (key == "survey-mode") rc.survey_mode = str(value);
      else if (key == "strata") rc.strata = str(value);
      else if (key == "seed") rc.seed = value.get<std::uint64_t>();
      else if (key == "bootstrap") rc.bootstrap = value.get<std::size_t>();
      else if (key == "level") rc.level = value.get<double>();
      else if (key == "lambda") rc.lambda = value.get<double>();
      else if (key == "citywide-p1") rc.citywide_p1 = value.get<double>();
      else if (key == "format") rc.format = str(value);
      else if (key == "haldane") rc.haldane = value.get<bool>();
      else if (key == "n") rc.n = value.get<std::size_t>();
      else if (key == "out-dir") rc.out_dir = str(value);
      else if (key == "threads") rc.threads = value.get<unsigned>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("config flag '{}': {}", key, e.what()));
    }
  }
}

void add_common(CLI::App& sub, RunConfig& rc) {
  sub.add_option("--config", rc.config_path, "JSON config: schemas and default flag values");
  sub.add_option("--seed", rc.seed, "Master random seed");
  sub.add_option("--format", rc.format, "Output format: table, csv, json-lines");
  sub.add_option("--out", rc.out, "Write the report here instead of stdout");
  sub.add_option("--threads", rc.threads, "Worker threads (results do not depend on this)");
}

void add_estimation(CLI::App& sub, RunConfig& rc) {
  sub.add_option("--admin", rc.admin, "Administrative records CSV");
  sub.add_option("--census", rc.census, "Census counts CSV (stratum,count_d1,count_d0)");
  sub.add_option("--strata", rc.strata, "Comma-separated strata, or 'all'; omitted: pool every row");
  sub.add_option("--bootstrap", rc.bootstrap, "Bootstrap replicates B");
  sub.add_option("--level", rc.level, "Confidence level");
  sub.add_flag("--haldane", rc.haldane, "Add 0.5 to every race x force cell");
}

std::vector<std::pair<std::string, std::string>> base_settings(const RunConfig& rc) {
  return {{"seed", std::to_string(rc.seed)}, {"kernels", std::string(kernels::active().name)}};
}

void add_bootstrap_settings(Report& report, const RunConfig& rc) {
  report.settings.emplace_back("bootstrap", std::to_string(rc.bootstrap));
  report.settings.emplace_back("level", format_number(rc.level));
  report.settings.emplace_back("interval", "percentile");
  report.settings.emplace_back("haldane", rc.haldane ? "true" : "false");
}

std::string source_label(const ExternalRaceDistribution& ext) { return ext.name(); }

void add_load_settings(Report& report, const std::string& what, const LoadReport& load) {
  report.settings.emplace_back(what + ".rows", std::to_string(load.physical_rows));
  report.settings.emplace_back(what + ".loaded", std::to_string(load.loaded));
  report.settings.emplace_back(what + ".dropped", std::to_string(load.dropped));
  report.settings.emplace_back(what + ".unparseable", std::to_string(load.unparseable));
  for (const auto& [value, count] : load.dropped_values) {
    report.settings.emplace_back(what + ".dropped[" + value + "]", std::to_string(count));
  }
}

void emit(const Report& report, const RunConfig& rc, std::ostream& out) {
  const auto format = parse_output_format(rc.format);
  if (rc.out.empty()) {
    write_report(report, format, out);
    return;
  }
  std::ofstream file(rc.out, std::ios::binary);
  if (!file) throw Error(ErrorKind::IOFailure, fmt::format("cannot write '{}'", rc.out));
  write_report(report, format, file);
}

DataConfig data_config(const RunConfig& rc) {
  return rc.config_path.empty() ? DataConfig{} : load_config(rc.config_path);
}

// ---------------------------------------------------------------- simulate

std::string extension(OutputFormat f) {
  switch (f) {
    case OutputFormat::table: return "txt";
    case OutputFormat::csv: return "csv";
    case OutputFormat::json_lines: return "jsonl";
  }
  return "txt";
}

void add_oracle_rows(Report& report, const std::string& stratum, const PopulationModel& m,
                     const OracleReport& o) {
  auto closed = [&](auto fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const auto norm = [&](Estimand e) { return closed([&] { return estimand_value(e, m).normalized; }); };
  const std::vector<std::tuple<std::string, OracleField, std::optional<double>>> fields = {
      {"ATE", o.ate, norm(Estimand::ate)},
      {"ATT", o.att, norm(Estimand::att)},
      {"ATE_M1", o.ate_m1, norm(Estimand::ate_m1)},
      {"ATT_M1", o.att_m1, norm(Estimand::att_m1)},
      {"PIE", o.pie, pie_pde(m).pie},
      {"PDE", o.pde, pie_pde(m).pde},
      {"CRR", o.crr, closed([&] { return crr_true(m); })},
      {"CRR_encounter", o.crr_encounter, closed([&] { return crr_true(m); })},
      {"naive_RR", o.naive_rr, closed([&] { return naive_rr_true(m); })},
      {"naive_RD", o.naive_rd, naive_rd_true(m)},
      {"P_M1", o.p_detained, m.p_detained()},
  };
  for (const auto& [name, field, closed_value] : fields) {
    auto row = scalar_row(stratum, name, "oracle", field.value);
    row.flags.push_back("se=" + format_number(field.se));
    report.rows.push_back(std::move(row));
    report.rows.push_back(scalar_row(stratum, name, "closed-form", closed_value));
  }
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  if (rc.model_file.empty()) throw Error(ErrorKind::InvalidArgument, "simulate needs --model-file");
  const auto models = load_model_file(rc.model_file);
  const auto format = parse_output_format(rc.format);

  std::vector<EncounterTable> tables;
  for (std::size_t k = 0; k < models.size(); ++k) {
    tables.push_back(sample_encounters(models[k].model, rc.n, derive_seed(rc.seed, k), {models[k].label, rc.threads}));
  }

  Report report;
  report.command = "simulate";
  report.settings = base_settings(rc);
  report.settings.emplace_back("n_per_stratum", std::to_string(rc.n));
  report.settings.emplace_back("model_file", rc.model_file);
  for (std::size_t k = 0; k < models.size(); ++k) {
    add_oracle_rows(report, models[k].label, models[k].model, oracle_estimands(tables[k]));
  }

  const auto table = concat(tables);
  fs::create_directories(rc.out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(rc.out_dir) / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::IOFailure, fmt::format("cannot write '{}'", (fs::path(rc.out_dir) / name).string()));
    return f;
  };
  {
    auto f = open("encounters.csv");
    write_encounters_csv(table, f);
  }
  {
    auto f = open("administrative.csv");
    f << "race,force,stratum\n";
    for (const auto& e : table.rows) {
      if (e.m == 1) f << int{e.d} << ',' << int{e.y} << ',' << csv::escape(table.stratum_key(e)) << '\n';
    }
  }
  {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> counts(table.strata.size());
    for (const auto& e : table.rows) (e.d == 1 ? counts[e.x].first : counts[e.x].second) += 1;
    auto f = open("census.csv");
    f << "stratum,count_d1,count_d0\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
      f << csv::escape(table.strata[i]) << ',' << counts[i].first << ',' << counts[i].second << '\n';
    }
  }
  {
    auto f = open("config.json");
    f << R"({
  "administrative": {
    "race_column": "race",
    "race_map": {"1": 1, "0": 0},
    "force_column": "force",
    "strata_columns": ["stratum"]
  },
  "census": {"stratum_column": "stratum", "minority_column": "count_d1", "majority_column": "count_d0"}
}
)";
  }
  {
    auto f = open("oracle." + extension(format));
    write_report(report, format, f);
  }
  emit(report, rc, out);
  return kExitOk;
}

// --------------------------------------------------------------- estimands

int cmd_estimands(const RunConfig& rc, std::ostream& out) {
  if (rc.model_file.empty()) throw Error(ErrorKind::InvalidArgument, "estimands needs --model-file");
  const auto models = load_model_file(rc.model_file);
  Report report;
  report.command = "estimands";
  report.settings = {{"model_file", rc.model_file}};
  auto guarded = [](auto fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  for (const auto& [label, m] : models) {
    const std::string src = "closed-form";
    report.rows.push_back(scalar_row(label, "beta_M", src, m.beta_m()));
    report.rows.push_back(scalar_row(label, "beta_Y", src, m.beta_y()));
    for (auto e : kAllEstimands) {
      std::optional<EstimandValue> v;
      std::string why;
      try {
        v = estimand_value(e, m);
      } catch (const Error& err) {
        why = std::string(to_string(err.kind()));
      }
      auto norm = scalar_row(label, std::string(to_string(e)), src, v ? std::optional(v->normalized) : std::nullopt);
      auto raw = scalar_row(label, std::string(to_string(e)) + ".raw", src,
                            v ? std::optional(v->raw_contrast) : std::nullopt);
      if (!why.empty()) {
        norm.flags.push_back(why);
        raw.flags.push_back(why);
      }
      report.rows.push_back(std::move(norm));
      report.rows.push_back(std::move(raw));
    }
    const auto dec = pie_pde(m);
    report.rows.push_back(scalar_row(label, "PIE", src, dec.pie));
    report.rows.push_back(scalar_row(label, "PDE", src, dec.pde));
    report.rows.push_back(scalar_row(label, "E_Y1", src, identify_ey(1, m)));
    report.rows.push_back(scalar_row(label, "E_Y0", src, identify_ey(0, m)));
    report.rows.push_back(scalar_row(label, "CRR", src, guarded([&] { return crr_true(m); })));
    report.rows.push_back(scalar_row(label, "naive_RR", src, guarded([&] { return naive_rr_true(m); })));
  }
  emit(report, rc, out);
  return kExitOk;
}

// ---------------------------------------------------------------- estimate

struct EstimationInputs {
  AdministrativeDataset data;
  std::vector<ExternalRaceDistribution> externals;
  std::vector<std::string> strata;
};

EstimationInputs load_inputs(const RunConfig& rc, Report& report, bool require_census) {
  if (rc.admin.empty()) throw Error(ErrorKind::InvalidArgument, "--admin is required");
  if (require_census && rc.census.empty()) throw Error(ErrorKind::InvalidArgument, "--census is required");
  const auto cfg = data_config(rc);

  EstimationInputs in;
  auto admin = load_administrative(rc.admin, cfg.administrative);
  add_load_settings(report, "admin", admin.report);
  in.data = std::move(admin.data);

  if (!rc.census.empty()) {
    auto census = load_census(rc.census, cfg.census);
    add_load_settings(report, "census", census.report);
    for (const auto& key : census.undefined_strata) {
      report.settings.emplace_back("census.undefined[" + key + "]", "zero population");
    }
    in.externals.push_back(std::move(census.distribution));
  }
  if (!rc.survey.empty()) {
    auto survey = load_survey(rc.survey, cfg.survey);
    add_load_settings(report, "survey", survey.report);
    for (const auto& mode : split_list(rc.survey_mode)) {
      in.externals.push_back(derive_survey_distribution(survey.rows, parse_survey_mode(mode)));
    }
  }

  if (rc.strata.empty()) {
    in.data = in.data.pooled("all");
    for (auto& ext : in.externals) ext = ext.pooled();
    in.strata = {"all"};
    report.settings.emplace_back("strata", "pooled");
  } else if (rc.strata == "all") {
    in.strata = in.data.strata();
    report.settings.emplace_back("strata", "all");
  } else {
    in.strata = split_list(rc.strata);
    report.settings.emplace_back("strata", rc.strata);
  }
  for (const auto& key : in.strata) {
    if (!in.data.has_stratum(key)) {
      throw Error(ErrorKind::UnknownStratum, fmt::format("stratum '{}' has no administrative rows", key));
    }
  }
  return in;
}

BootstrapOptions bootstrap_options(const RunConfig& rc) {
  return {rc.bootstrap, rc.level, rc.seed, rc.threads, rc.haldane};
}

ReportRow tagged(ReportRow row, const RunConfig& rc, const ExternalRaceDistribution* ext) {
  if (ext != nullptr) row.flags.push_back(std::string(to_string(ext->kind())));
  if (rc.haldane) row.flags.push_back("haldane");
  return row;
}

int cmd_estimate(const RunConfig& rc, std::ostream& out) {
  Report report;
  report.command = "estimate";
  report.settings = base_settings(rc);
  add_bootstrap_settings(report, rc);
  const auto in = load_inputs(rc, report, false);
  const auto opts = bootstrap_options(rc);

  for (const auto& key : in.strata) {
    report.rows.push_back(tagged(
        estimate_row(key, "naive_rr", "none", try_bootstrap(Statistic::naive_rr, in.data, nullptr, key, opts)), rc,
        nullptr));
    report.rows.push_back(tagged(
        estimate_row(key, "naive_rd", "none", try_bootstrap(Statistic::naive_rd, in.data, nullptr, key, opts)), rc,
        nullptr));
    for (const auto& ext : in.externals) {
      report.rows.push_back(tagged(estimate_row(key, "bias_factor", source_label(ext),
                                                try_bootstrap(Statistic::bias_factor, in.data, &ext, key, opts)),
                                   rc, &ext));
      report.rows.push_back(tagged(
          estimate_row(key, "crr", source_label(ext), try_bootstrap(Statistic::crr, in.data, &ext, key, opts)), rc,
          &ext));
    }
  }
  emit(report, rc, out);
  return kExitOk;
}

// ------------------------------------------------------------- sensitivity

int cmd_sensitivity(const RunConfig& rc, std::ostream& out) {
  Report report;
  report.command = "sensitivity";
  report.settings = base_settings(rc);
  add_bootstrap_settings(report, rc);
  RunConfig local = rc;
  if (local.strata.empty()) local.strata = "all";
  const auto in = load_inputs(local, report, true);
  const auto& census = in.externals.front();

  double citywide = rc.citywide_p1;
  if (citywide < 0.0) citywide = census.pooled().p1(kAnyStratum);
  const auto mixed = sensitivity_mixture(census, citywide, rc.lambda);
  report.settings.emplace_back("lambda", format_number(rc.lambda));
  report.settings.emplace_back("citywide_p1", format_number(citywide));
  const auto opts = bootstrap_options(rc);

  const std::string mixed_label = fmt::format("{}:mixture", census.name());
  for (const auto& key : in.strata) {
    auto base = tagged(estimate_row(key, "crr", census.name(), try_bootstrap(Statistic::crr, in.data, &census, key, opts)),
                       rc, &census);
    base.flags.push_back("lambda=1");
    report.rows.push_back(std::move(base));
    auto row = tagged(estimate_row(key, "crr", mixed_label, try_bootstrap(Statistic::crr, in.data, &mixed, key, opts)),
                      rc, &mixed);
    row.flags.push_back("lambda=" + format_number(rc.lambda));
    if (const auto p = mixed.try_p1(key)) row.flags.push_back("p1=" + format_number(*p));
    report.rows.push_back(std::move(row));
  }
  emit(report, rc, out);
  return kExitOk;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const RunConfig& rc, std::ostream& out) {
  VerifyOptions opts;
  opts.seed = rc.seed;
  opts.sign_draws = rc.sign_draws;
  opts.oracle_models = rc.oracle_models;
  opts.oracle_rows = rc.oracle_rows;
  opts.threads = rc.threads;
  opts.inject_fault = rc.inject_fault;
  const auto results = run_verification(opts);

  Report report;
  report.command = "verify";
  report.settings = base_settings(rc);
  report.settings.emplace_back("sign_draws", std::to_string(opts.sign_draws));
  report.settings.emplace_back("oracle_models", std::to_string(opts.oracle_models));
  report.settings.emplace_back("oracle_rows", std::to_string(opts.oracle_rows));
  report.settings.emplace_back("oracle_z", format_number(opts.oracle_z));
  report.settings.emplace_back("inject_fault", opts.inject_fault ? "true" : "false");
  bool all_passed = true;
  for (const auto& r : results) {
    report.settings.emplace_back("detail." + r.name, r.detail);
    auto row = scalar_row("-", r.name, "verify", r.passed ? 1.0 : 0.0);
    row.flags.push_back(r.passed ? "pass" : "fail");
    row.flags.push_back(fmt::format("seconds={:.3f}", r.seconds));
    report.rows.push_back(std::move(row));
    all_passed = all_passed && r.passed;
  }
  for (auto& [k, v] : report.settings) {
    if (k.starts_with("detail.")) std::replace(v.begin(), v.end(), '\n', ' ');
  }
  emit(report, rc, out);
  return all_passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal risk ratio estimation from detained-only administrative records", "crr"};
  app.require_subcommand(1);
  RunConfig rc;

  auto* simulate = app.add_subcommand("simulate", "Draw encounters from a model and write CSV fixtures");
  add_common(*simulate, rc);
  simulate->add_option("--model-file", rc.model_file, "Model record(s): key = value lines, optional [stratum] sections");
  simulate->add_option("--n", rc.n, "Encounters per model");
  simulate->add_option("--out-dir", rc.out_dir, "Directory for the generated files");

  auto* estimands = app.add_subcommand("estimands", "Closed-form estimands of a model");
  add_common(*estimands, rc);
  estimands->add_option("--model-file", rc.model_file, "Model record(s)");

  auto* estimate = app.add_subcommand("estimate", "Naive and selection-adjusted risk ratios with bootstrap CIs");
  add_common(*estimate, rc);
  add_estimation(*estimate, rc);
  estimate->add_option("--survey", rc.survey, "Survey microdata CSV");
  estimate->add_option("--survey-mode", rc.survey_mode,
                       "Comma-separated: all, mv-stop, stop-in-public, large-metro, weighted, weighted-large-metro");

  auto* sensitivity = app.add_subcommand("sensitivity", "Local/citywide mixture of census shares");
  add_common(*sensitivity, rc);
  add_estimation(*sensitivity, rc);
  sensitivity->add_option("--lambda", rc.lambda, "Weight on the local share");
  sensitivity->add_option("--citywide-p1", rc.citywide_p1, "Citywide minority share (default: pooled census)");

  auto* verify = app.add_subcommand("verify", "Reference counterexamples, sign property, oracle agreement");
  add_common(*verify, rc);
  verify->add_flag("--inject-fault", rc.inject_fault, "Evaluate with a deliberately wrong ATE_M1 weight formula");
  verify->add_option("--sign-draws", rc.sign_draws, "Random models for the sign checks");
  verify->add_option("--oracle-models", rc.oracle_models, "Random models for the oracle check");
  verify->add_option("--oracle-rows", rc.oracle_rows, "Encounters per oracle model");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!rc.config_path.empty()) {
      json root;
      try {
        root = json::parse(read_file(rc.config_path));
      } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("config is not valid JSON: {}", e.what()));
      }
      if (root.contains("flags")) apply_config_flags(root.at("flags"), *sub, rc);
    }
    if (sub == simulate) return cmd_simulate(rc, out);
    if (sub == estimands) return cmd_estimands(rc, out);
    if (sub == estimate) return cmd_estimate(rc, out);
    if (sub == sensitivity) return cmd_sensitivity(rc, out);
    return cmd_verify(rc, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace crr::cli
