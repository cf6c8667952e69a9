#include "crr/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "crr/errors.hpp"

namespace crr {

namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_probability(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorKind::InvalidModel, fmt::format("cannot parse value '{}' for key '{}'", text, key));
  }
  return value;
}

double* field_for(PopulationModel& m, std::string_view key) {
  if (key == "p_d") return &m.p_d;
  if (key == "pi_al") return &m.pi_al;
  if (key == "pi_mi") return &m.pi_mi;
  if (key == "pi_ma") return &m.pi_ma;
  if (key == "pi_ne") return &m.pi_ne;
  if (key == "mu_01") return &m.mu_01;
  if (key == "mu_11") return &m.mu_11;
  return nullptr;
}

constexpr std::array<std::string_view, 7> kKeys = {"p_d",   "pi_al", "pi_mi", "pi_ma",
                                                   "pi_ne", "mu_01", "mu_11"};

struct PendingRecord {
  std::string label;
  PopulationModel model;
  unsigned seen = 0;  // bitmask over kKeys
  bool any = false;
};

void finish(PendingRecord& rec, std::vector<LabeledModel>& out) {
  if (!rec.any) return;
  for (std::size_t i = 0; i < kKeys.size(); ++i) {
    if ((rec.seen & (1u << i)) == 0) {
      throw Error(ErrorKind::InvalidModel,
                  fmt::format("model '{}' is missing key '{}'", rec.label, kKeys[i]));
    }
  }
  rec.model.validate();
  out.push_back({rec.label, rec.model});
}

}  // namespace

std::string_view to_string(Stratum s) {
  switch (s) {
    case Stratum::always: return "al";
    case Stratum::minority: return "mi";
    case Stratum::majority: return "ma";
    case Stratum::never: return "ne";
  }
  return "?";
}

std::string_view to_string(Estimand e) {
  switch (e) {
    case Estimand::ate: return "ATE";
    case Estimand::att: return "ATT";
    case Estimand::ate_m1: return "ATE_M1";
    case Estimand::att_m1: return "ATT_M1";
  }
  return "?";
}

double StratumVector::dot(const StratumVector& other) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * other.values[i];
  return acc;
}

double StratumVector::sum() const { return values[0] + values[1] + values[2] + values[3]; }

StratumWeights StratumWeights::normalize() const {
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroMass, "cannot normalize all-zero stratum weights");
  StratumWeights out{w, true};
  for (auto& v : out.w.values) v /= total;
  return out;
}

void PopulationModel::validate() const {
  const std::array<double, 7> fields = {p_d, pi_al, pi_mi, pi_ma, pi_ne, mu_01, mu_11};
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!in_unit_interval(fields[i])) {
      throw Error(ErrorKind::InvalidModel, fmt::format("{} = {} is outside [0, 1]", kKeys[i], fields[i]));
    }
  }
  const double total = pi_al + pi_mi + pi_ma + pi_ne;
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw Error(ErrorKind::InvalidModel, fmt::format("stratum masses sum to {:.17g}, not 1", total));
  }
}

bool PopulationModel::is_valid() const noexcept {
  try {
    validate();
    return true;
  } catch (const Error&) {
    return false;
  }
}

StratumVector PopulationModel::strata() const { return StratumVector{{pi_al, pi_mi, pi_ma, pi_ne}}; }

double PopulationModel::mediator_mean(int d) const { return d == 1 ? pi_al + pi_mi : pi_al + pi_ma; }

double PopulationModel::p_detained() const {
  return p_d * mediator_mean(1) + (1.0 - p_d) * mediator_mean(0);
}

double PopulationModel::p_minority_given_detained() const {
  const double total = p_detained();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroMass, "P(M = 1) is zero");
  return p_d * mediator_mean(1) / total;
}

std::string to_text(const PopulationModel& m) {
  return fmt::format(
      "p_d = {:.17g}\npi_al = {:.17g}\npi_mi = {:.17g}\npi_ma = {:.17g}\npi_ne = {:.17g}\n"
      "mu_01 = {:.17g}\nmu_11 = {:.17g}\n",
      m.p_d, m.pi_al, m.pi_mi, m.pi_ma, m.pi_ne, m.mu_01, m.mu_11);
}

std::vector<LabeledModel> models_from_text(std::string_view text, std::string_view default_label) {
  std::vector<LabeledModel> out;
  PendingRecord rec{std::string(default_label), {}, 0, false};
  bool sectioned = false;
  std::size_t line_no = 0;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorKind::InvalidModel, fmt::format("line {}: malformed section header", line_no));
      }
      if (!sectioned && rec.any) {
        throw Error(ErrorKind::InvalidModel,
                    fmt::format("line {}: keys before the first section header", line_no));
      }
      finish(rec, out);
      sectioned = true;
      rec = PendingRecord{std::string(trim(line.substr(1, line.size() - 2))), {}, 0, true};
      continue;
    }

    const auto eq = line.find_first_of("=:");
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::InvalidModel, fmt::format("line {}: expected 'key = value'", line_no));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    double* slot = field_for(rec.model, key);
    if (slot == nullptr) {
      throw Error(ErrorKind::InvalidModel, fmt::format("line {}: unknown key '{}'", line_no, key));
    }
    *slot = parse_probability(key, value);
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
      if (kKeys[i] == key) rec.seen |= 1u << i;
    }
    rec.any = true;
  }
  finish(rec, out);
  if (out.empty()) throw Error(ErrorKind::InvalidModel, "no model record found");
  return out;
}

PopulationModel model_from_text(std::string_view text) {
  auto models = models_from_text(text, "model");
  if (models.size() != 1) {
    throw Error(ErrorKind::InvalidModel, fmt::format("expected one model record, found {}", models.size()));
  }
  return models.front().model;
}

std::vector<LabeledModel> load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IOFailure, fmt::format("cannot open model file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return models_from_text(buf.str(), "all");
}

ThetaVector theta_of(const PopulationModel& m) {
  ThetaVector t;
  t[Stratum::always] = m.beta_y();
  t[Stratum::minority] = m.beta_y() + m.mu_01;
  t[Stratum::majority] = -m.mu_01;
  t[Stratum::never] = 0.0;
  return t;
}

StratumWeights weights_of(Estimand estimand, const PopulationModel& m) {
  StratumWeights out;
  auto& w = out.w;
  switch (estimand) {
    case Estimand::ate:
    case Estimand::att:
      w = m.strata();
      return out;
    case Estimand::ate_m1:
      w[Stratum::always] = m.pi_al;
      w[Stratum::minority] = (m.pi_ma + m.beta_m()) * m.p_d;
      w[Stratum::majority] = m.pi_ma * (1.0 - m.p_d);
      w[Stratum::never] = 0.0;
      break;
    case Estimand::att_m1:
      w[Stratum::always] = m.pi_al;
      w[Stratum::minority] = m.pi_ma + m.beta_m();
      w[Stratum::majority] = 0.0;
      w[Stratum::never] = 0.0;
      break;
  }
  if (!(w.sum() > 0.0)) {
    throw Error(ErrorKind::ZeroMass, fmt::format("{} conditions on a null event", to_string(estimand)));
  }
  return out;
}

EstimandValue estimand_value(const StratumWeights& weights, const ThetaVector& theta) {
  EstimandValue v;
  v.mass = weights.w.sum();
  if (!(v.mass > 0.0)) throw Error(ErrorKind::ZeroMass, "stratum weights sum to zero");
  v.raw_contrast = weights.w.dot(theta);
  v.normalized = v.raw_contrast / v.mass;
  return v;
}

EstimandValue estimand_value(Estimand estimand, const PopulationModel& model) {
  return estimand_value(weights_of(estimand, model), theta_of(model));
}

EffectDecomposition pie_pde(const PopulationModel& m) {
  return {m.beta_m() * m.mu_11, m.beta_y() * m.mediator_mean(0)};
}

double identify_ey(int d, const PopulationModel& m) { return m.force_mean(d) * m.mediator_mean(d); }

double crr_true(const PopulationModel& m) {
  const double denom = identify_ey(0, m);
  if (!(denom > 0.0)) throw Error(ErrorKind::ZeroDenominator, "E[Y(0)] is zero");
  return identify_ey(1, m) / denom;
}

double naive_rr_true(const PopulationModel& m) {
  if (!(m.mu_01 > 0.0)) throw Error(ErrorKind::ZeroDenominator, "E[Y(0, 1)] is zero");
  return m.mu_11 / m.mu_01;
}

double naive_rd_true(const PopulationModel& m) { return m.mu_11 - m.mu_01; }

namespace reference_models {

PopulationModel toy() { return {0.5, 0.2, 0.1, 0.0, 0.7, 0.1, 0.2}; }

PopulationModel paradox(double beta, double p_d) {
  PopulationModel m;
  m.p_d = p_d;
  m.pi_al = 0.1;
  m.pi_ma = 0.05;
  m.pi_mi = m.pi_ma + beta;
  m.pi_ne = 1.0 - m.pi_al - m.pi_mi - m.pi_ma;
  m.mu_01 = 0.1;
  m.mu_11 = m.mu_01 + beta;
  return m;
}

}  // namespace reference_models

}  // namespace crr
