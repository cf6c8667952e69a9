#pragma once

// Brute-force reference for the parametric model: enumerates every
// (race, stratum, y01, y11) cell with its probability and evaluates
// quantities as plain expectations over potential outcomes. Shares no code
// with the closed forms in the library.

#include <array>
#include <functional>
#include <vector>

#include "crr/model.hpp"

namespace crr::testing {

struct Cell {
  double prob = 0.0;
  int d = 0;
  int m0 = 0;
  int m1 = 0;
  int y01 = 0;
  int y11 = 0;

  int m_under(int race) const { return race == 1 ? m1 : m0; }
  int y_under(int race) const { return race == 1 ? m1 * y11 : m0 * y01; }
  int m() const { return m_under(d); }
  int y() const { return y_under(d); }
};

inline std::vector<Cell> enumerate(const PopulationModel& p) {
  const std::array<double, 4> mass = {p.pi_al, p.pi_mi, p.pi_ma, p.pi_ne};
  // (m0, m1) for always, minority, majority, never.
  const std::array<std::array<int, 2>, 4> stops = {{{1, 1}, {0, 1}, {1, 0}, {0, 0}}};
  std::vector<Cell> cells;
  for (int d = 0; d < 2; ++d) {
    for (int s = 0; s < 4; ++s) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          Cell c;
          c.d = d;
          c.m0 = stops[s][0];
          c.m1 = stops[s][1];
          c.y01 = a;
          c.y11 = b;
          c.prob = (d ? p.p_d : 1.0 - p.p_d) * mass[s] * (a ? p.mu_01 : 1.0 - p.mu_01) *
                   (b ? p.mu_11 : 1.0 - p.mu_11);
          cells.push_back(c);
        }
      }
    }
  }
  return cells;
}

using CellFn = std::function<double(const Cell&)>;

inline double expect(const std::vector<Cell>& cells, const CellFn& f, const CellFn& weight) {
  double num = 0.0, den = 0.0;
  for (const auto& c : cells) {
    num += c.prob * weight(c) * f(c);
    den += c.prob * weight(c);
  }
  return num / den;
}

inline double total(const std::vector<Cell>& cells, const CellFn& f) {
  double s = 0.0;
  for (const auto& c : cells) s += c.prob * f(c);
  return s;
}

struct Reference {
  double ate, att, ate_m1, att_m1;
  double ate_m1_raw, att_m1_raw;
  double pie, pde;
  double ey1, ey0, crr;
  double naive_rr, naive_rd;
  double p_detained, p_minority_detained;
};

inline Reference reference(const PopulationModel& p) {
  const auto cells = enumerate(p);
  const CellFn effect = [](const Cell& c) { return double(c.y_under(1) - c.y_under(0)); };
  const CellFn one = [](const Cell&) { return 1.0; };
  const CellFn treated = [](const Cell& c) { return double(c.d); };
  const CellFn detained = [](const Cell& c) { return double(c.m()); };
  const CellFn treated_detained = [](const Cell& c) { return double(c.d * c.m()); };

  Reference r{};
  r.ate = expect(cells, effect, one);
  r.att = expect(cells, effect, treated);
  r.ate_m1 = expect(cells, effect, detained);
  r.att_m1 = expect(cells, effect, treated_detained);
  r.ate_m1_raw = total(cells, [&](const Cell& c) { return effect(c) * c.m(); });
  r.att_m1_raw = total(cells, [&](const Cell& c) { return c.d * effect(c) * c.m(); }) / p.p_d;
  r.pie = total(cells, [](const Cell& c) { return double(c.y11 * (c.m1 - c.m0)); });
  r.pde = total(cells, [](const Cell& c) { return double(c.m0 * (c.y11 - c.y01)); });
  r.ey1 = total(cells, [](const Cell& c) { return double(c.y_under(1)); });
  r.ey0 = total(cells, [](const Cell& c) { return double(c.y_under(0)); });
  r.crr = r.ey1 / r.ey0;
  const CellFn y = [](const Cell& c) { return double(c.y()); };
  const double r1 = expect(cells, y, treated_detained);
  const double r0 = expect(cells, y, [](const Cell& c) { return double((1 - c.d) * c.m()); });
  r.naive_rr = r1 / r0;
  r.naive_rd = r1 - r0;
  r.p_detained = total(cells, detained);
  r.p_minority_detained = expect(cells, treated, detained);
  return r;
}

}  // namespace crr::testing
