#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crr/errors.hpp"
#include "crr/report.hpp"

using namespace crr;

namespace {

Report sample_report() {
  Report r;
  r.command = "estimate";
  r.settings = {{"seed", "7"}, {"bootstrap", "1000"}, {"strata", "all"}};
  EstimateWithCI e;
  e.point = 2.5;
  e.lo = 1.75;
  e.hi = 3.125;
  e.level = 0.95;
  e.replicates = 1000;
  e.undefined_replicates = 3;
  r.rows.push_back(estimate_row("precinct 1", "crr", "census", MaybeEstimate{e, {}, {}}));
  r.rows.push_back(estimate_row("a,b", "naive_rr", "none", MaybeEstimate{{}, ErrorKind::MissingGroup, "none"}));
  auto s = scalar_row("all", "ATE", "oracle", 0.1);
  s.flags = {"se=0.01", "note \"x\""};
  r.rows.push_back(s);
  r.rows.push_back(scalar_row("all", "CRR", "closed-form", std::nullopt));
  return r;
}

std::string render(OutputFormat f) {
  std::ostringstream out;
  write_report(sample_report(), f, out);
  return out.str();
}

void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(CRR_GOLDEN) + "/" + name;
  if (std::getenv("CRR_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << actual;
  }
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == actual);
}

}  // namespace

TEST_CASE("csv report matches golden file") { check_golden("report.csv", render(OutputFormat::csv)); }

TEST_CASE("json-lines report matches golden file") {
  check_golden("report.jsonl", render(OutputFormat::json_lines));
}

TEST_CASE("table report matches golden file") { check_golden("report.txt", render(OutputFormat::table)); }

TEST_CASE("json-lines rows parse and carry typed values") {
  std::istringstream in(render(OutputFormat::json_lines));
  std::string line;
  std::vector<nlohmann::json> objs;
  while (std::getline(in, line)) objs.push_back(nlohmann::json::parse(line));
  REQUIRE(objs.size() == 5);
  CHECK(objs[0]["type"] == "header");
  CHECK(objs[0]["schema"] == std::string(kReportSchema));
  CHECK(objs[1]["point"] == 2.5);
  CHECK(objs[1]["undefined_replicates"] == 3);
  CHECK(objs[2]["point"] == std::string(kUndefinedToken));
  CHECK(objs[3]["lo"] == std::string(kNotApplicableToken));
}

TEST_CASE("numbers round-trip") {
  for (double v : {0.1, 1.0 / 3.0, 12.000000000000004, 1e-300, -2.5}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("format names") {
  CHECK(parse_output_format("csv") == OutputFormat::csv);
  CHECK(parse_output_format("json-lines") == OutputFormat::json_lines);
  CHECK_THROWS_AS(parse_output_format("xml"), Error);
}
