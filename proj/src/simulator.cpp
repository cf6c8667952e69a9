#include "crr/simulator.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "crr/data.hpp"
#include "crr/errors.hpp"
#include "crr/rng.hpp"

namespace crr {

namespace {

void fill_shard(const PopulationModel& model, std::uint64_t shard_seed, std::span<Encounter> out) {
  Rng rng(shard_seed);
  const auto strata = model.strata();
  for (auto& e : out) {
    // Draw order per row: d, s, y01, y11.
    e.d = rng.bernoulli(model.p_d) ? 1 : 0;
    e.s = static_cast<Stratum>(rng.categorical(strata.values));
    e.y01 = rng.bernoulli(model.mu_01) ? 1 : 0;
    e.y11 = rng.bernoulli(model.mu_11) ? 1 : 0;
    e.m0 = static_cast<std::uint8_t>(mediator_under(e.s, 0));
    e.m1 = static_cast<std::uint8_t>(mediator_under(e.s, 1));
    e.m = e.d == 1 ? e.m1 : e.m0;
    e.y = e.m == 1 ? (e.d == 1 ? e.y11 : e.y01) : 0;
    e.x = 0;
  }
}

struct Moments {
  double n = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double z, double count) {
    n += count;
    sum += z * count;
    sum_sq += z * z * count;
  }
  double mean() const { return sum / n; }
  double variance() const {
    if (n < 2.0) return 0.0;
    const double m = mean();
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
  }
};

struct Row {
  int d, m0, m1, y01, y11;
  int m() const { return d == 1 ? m1 : m0; }
  int y() const { return m() == 1 ? (d == 1 ? y11 : y01) : 0; }
  int y1() const { return y11 & m1; }
  int y0() const { return y01 & m0; }
};

Row decode(std::size_t code) {
  return {static_cast<int>(code & 1u), static_cast<int>((code >> 1) & 1u), static_cast<int>((code >> 2) & 1u),
          static_cast<int>((code >> 3) & 1u), static_cast<int>((code >> 4) & 1u)};
}

Moments moments(const PatternCounts& c, const std::function<bool(const Row&)>& keep,
                const std::function<double(const Row&)>& value) {
  Moments m;
  for (std::size_t code = 0; code < c.size(); ++code) {
    if (c[code] == 0) continue;
    const Row r = decode(code);
    if (keep(r)) m.add(value(r), static_cast<double>(c[code]));
  }
  return m;
}

OracleField mean_field(const Moments& m) {
  OracleField f;
  if (m.n > 0.0) {
    f.value = m.mean();
    f.se = std::sqrt(m.variance() / m.n);
  }
  return f;
}

OracleField difference_field(const Moments& a, const Moments& b) {
  OracleField f;
  if (a.n > 0.0 && b.n > 0.0) {
    f.value = a.mean() - b.mean();
    f.se = std::sqrt(a.variance() / a.n + b.variance() / b.n);
  }
  return f;
}

// Ratio of means of two independent groups, delta method.
OracleField group_ratio_field(const Moments& num, const Moments& den) {
  OracleField f;
  if (num.n > 0.0 && den.n > 0.0 && den.mean() > 0.0) {
    const double p1 = num.mean();
    const double p0 = den.mean();
    f.value = p1 / p0;
    const double var = num.variance() / (num.n * p0 * p0) + p1 * p1 * den.variance() / (den.n * p0 * p0 * p0 * p0);
    f.se = std::sqrt(var);
  }
  return f;
}

}  // namespace

EncounterTable sample_encounters(const PopulationModel& model, std::size_t n, std::uint64_t seed,
                                 const SimulationOptions& options) {
  model.validate();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample size must be at least 1");

  EncounterTable table;
  table.model = model;
  table.seed = seed;
  table.strata = {options.stratum};
  table.rows.resize(n);

  const std::size_t shards = (n + kShardRows - 1) / kShardRows;
  auto run_shard = [&](std::size_t k) {
    const std::size_t begin = k * kShardRows;
    const std::size_t len = std::min(kShardRows, n - begin);
    fill_shard(model, derive_seed(seed, k), std::span<Encounter>(table.rows).subspan(begin, len));
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(shards)));
  if (workers == 1) {
    for (std::size_t k = 0; k < shards; ++k) run_shard(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < shards; k += workers) run_shard(k);
      });
    }
  }
  return table;
}

EncounterTable concat(const std::vector<EncounterTable>& tables) {
  EncounterTable out;
  if (tables.empty()) return out;
  out.model = tables.front().model;
  out.seed = tables.front().seed;
  out.strata.clear();
  std::unordered_map<std::string, std::uint32_t> index;
  std::size_t total = 0;
  for (const auto& t : tables) total += t.rows.size();
  out.rows.reserve(total);
  for (const auto& t : tables) {
    std::vector<std::uint32_t> remap(t.strata.size());
    for (std::size_t i = 0; i < t.strata.size(); ++i) {
      auto [it, inserted] = index.emplace(t.strata[i], static_cast<std::uint32_t>(out.strata.size()));
      if (inserted) out.strata.push_back(t.strata[i]);
      remap[i] = it->second;
    }
    for (auto e : t.rows) {
      e.x = remap[e.x];
      out.rows.push_back(e);
    }
  }
  return out;
}

AdministrativeDataset to_administrative(const EncounterTable& table) {
  AdministrativeDataset out;
  for (const auto& e : table.rows) {
    if (e.m == 1) out.add(e.d, e.y, table.stratum_key(e));
  }
  return out;
}

void write_encounters_csv(const EncounterTable& table, std::ostream& out) {
  out << "d,s,m0,m1,y01,y11,m,y,x\n";
  for (const auto& e : table.rows) {
    out << int{e.d} << ',' << to_string(e.s) << ',' << int{e.m0} << ',' << int{e.m1} << ',' << int{e.y01} << ','
        << int{e.y11} << ',' << int{e.m} << ',' << int{e.y} << ',' << table.stratum_key(e) << '\n';
  }
}

PatternCounts pattern_counts(const EncounterTable& table) {
  PatternCounts c{};
  for (const auto& e : table.rows) {
    const unsigned code = e.d | (e.m0 << 1) | (e.m1 << 2) | (e.y01 << 3) | (e.y11 << 4);
    ++c[code];
  }
  return c;
}

OracleReport oracle_estimands(const PatternCounts& c) {
  const auto all = [](const Row&) { return true; };
  const auto detained = [](const Row& r) { return r.m() == 1; };
  const auto treated = [](const Row& r) { return r.d == 1; };
  const auto treated_detained = [](const Row& r) { return r.d == 1 && r.m() == 1; };
  const auto effect = [](const Row& r) { return static_cast<double>(r.y1() - r.y0()); };

  OracleReport rep;
  for (auto v : c) rep.n += v;

  rep.ate = mean_field(moments(c, all, effect));
  rep.att = mean_field(moments(c, treated, effect));
  rep.ate_m1 = mean_field(moments(c, detained, effect));
  rep.att_m1 = mean_field(moments(c, treated_detained, effect));
  // PIE = E[Y(1, M(1)) - Y(1, M(0))], PDE = E[Y(1, M(0)) - Y(0, M(0))].
  rep.pie = mean_field(moments(c, all, [](const Row& r) { return double(r.y11 * r.m1 - r.y11 * r.m0); }));
  rep.pde = mean_field(moments(c, all, [](const Row& r) { return double(r.y11 * r.m0 - r.y01 * r.m0); }));
  rep.p_detained = mean_field(moments(c, all, [](const Row& r) { return double(r.m()); }));

  // Paired ratio mean(Y(1)) / mean(Y(0)), delta method with covariance.
  {
    double n = 0, a = 0, b = 0, aa = 0, bb = 0, ab = 0;
    for (std::size_t code = 0; code < c.size(); ++code) {
      const double k = static_cast<double>(c[code]);
      if (k == 0.0) continue;
      const Row r = decode(code);
      n += k;
      a += k * r.y1();
      b += k * r.y0();
      aa += k * r.y1() * r.y1();
      bb += k * r.y0() * r.y0();
      ab += k * r.y1() * r.y0();
    }
    if (n > 0 && b > 0) {
      const double ma = a / n;
      const double mb = b / n;
      const double ratio = ma / mb;
      const double denom = n > 1 ? n - 1 : 1;
      const double va = (aa - n * ma * ma) / denom;
      const double vb = (bb - n * mb * mb) / denom;
      const double cov = (ab - n * ma * mb) / denom;
      const double var = std::max(0.0, (va - 2.0 * ratio * cov + ratio * ratio * vb) / (n * mb * mb));
      rep.crr.value = ratio;
      rep.crr.se = std::sqrt(var);
    }
  }

  const auto observed_force = [](const Row& r) { return static_cast<double>(r.y()); };
  rep.crr_encounter = group_ratio_field(moments(c, treated, observed_force),
                                        moments(c, [](const Row& r) { return r.d == 0; }, observed_force));

  const auto majority_detained = [](const Row& r) { return r.d == 0 && r.m() == 1; };
  const Moments force1 = moments(c, treated_detained, observed_force);
  const Moments force0 = moments(c, majority_detained, observed_force);
  rep.naive_rr = group_ratio_field(force1, force0);
  rep.naive_rd = difference_field(force1, force0);
  return rep;
}

OracleReport oracle_estimands(const EncounterTable& table) { return oracle_estimands(pattern_counts(table)); }

std::optional<double> empirical_bias_factor(const EncounterTable& table) {
  double detained1 = 0, detained0 = 0, all1 = 0, all0 = 0;
  for (const auto& e : table.rows) {
    (e.d == 1 ? all1 : all0) += 1;
    if (e.m == 1) (e.d == 1 ? detained1 : detained0) += 1;
  }
  if (detained0 == 0 || detained1 == 0 || all0 == 0 || all1 == 0) return std::nullopt;
  return (detained1 / detained0) / (all1 / all0);
}

}  // namespace crr
