#pragma once

#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "dmpqc/graph.hpp"
#include "dmpqc/rng.hpp"

namespace dmpqc {

// Dotted-Triple-Graph DT(G): every base vertex becomes a set of three
// primary vertices, every base edge becomes nine added vertices, each
// connecting one primary vertex on either side. 3|V| + 9|E| vertices in
// total; every added vertex has degree exactly 2.

struct BaseLoc {
  bool is_edge = false;
  int index = 0;  // base vertex or base edge index

  friend bool operator==(const BaseLoc& a, const BaseLoc& b) {
    return a.is_edge == b.is_edge && a.index == b.index;
  }
};

struct Dtg {
  OpenGraph base;
  int n = 0;
  std::vector<std::array<int, 3>> primary;  // per base vertex
  std::vector<std::array<int, 9>> added;    // per base edge; cell (i,j) at 3i+j
  std::vector<std::pair<int, int>> edges;   // DT(G) edges
  std::vector<BaseLoc> base_location;       // per DT vertex

  int primary_at(int base_vertex, int pos) const { return primary[base_vertex][pos]; }
  int added_at(int base_edge, int i, int j) const { return added[base_edge][3 * i + j]; }

  std::vector<int> neighbours(int v) const {
    std::vector<int> r;
    for (auto [a, b] : edges) {
      if (a == v) r.push_back(b);
      if (b == v) r.push_back(a);
    }
    return r;
  }

  // Position (0..2) of a primary vertex within its set.
  int position_of(int dt_vertex) const {
    const BaseLoc loc = base_location.at(dt_vertex);
    if (loc.is_edge) throw std::invalid_argument("not a primary vertex");
    for (int p = 0; p < 3; ++p)
      if (primary[loc.index][p] == dt_vertex) return p;
    throw std::logic_error("corrupt dtg");
  }
};

inline Dtg build_dtg(const OpenGraph& base) {
  base.validate();
  if (base.n == 0) throw std::invalid_argument("empty base graph");
  Dtg d;
  d.base = base;
  for (int v = 0; v < base.n; ++v) {
    std::array<int, 3> set{};
    for (int p = 0; p < 3; ++p) set[p] = d.n++;
    d.primary.push_back(set);
    for (int p = 0; p < 3; ++p) d.base_location.push_back({false, v});
  }
  for (std::size_t e = 0; e < base.edges.size(); ++e) {
    const auto [u, v] = base.edges[e];
    std::array<int, 9> set{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int id = d.n++;
        set[3 * i + j] = id;
        d.base_location.push_back({true, static_cast<int>(e)});
        d.edges.emplace_back(d.primary[u][i], id);
        d.edges.emplace_back(id, d.primary[v][j]);
      }
    d.added.push_back(set);
  }
  return d;
}

enum class VRole : int { Computation = 0, Trap = 1, Dummy = 2 };

// Role of every DT(G) vertex. Primary-set roles are free (one of each per
// set); added-set roles are then forced: the computation vertex joins the
// two primary computation vertices, the trap joins two primary dummies,
// everything else is a dummy.
struct TrapColouring {
  std::vector<VRole> role;

  VRole at(int v) const { return role.at(v); }
  bool is_dummy(int v) const { return role.at(v) == VRole::Dummy; }
};

// Per-base-vertex primary assignment: positions of (comp, trap, dummy).
struct PrimaryAssignment {
  int comp = 0, trap = 1, dummy = 2;
};

inline TrapColouring colouring_from_assignment(const Dtg& d,
                                               const std::vector<PrimaryAssignment>& as) {
  TrapColouring c;
  c.role.assign(d.n, VRole::Dummy);
  for (int v = 0; v < d.base.n; ++v) {
    c.role[d.primary[v][as[v].comp]] = VRole::Computation;
    c.role[d.primary[v][as[v].trap]] = VRole::Trap;
    c.role[d.primary[v][as[v].dummy]] = VRole::Dummy;
  }
  for (std::size_t e = 0; e < d.base.edges.size(); ++e) {
    const auto [u, v] = d.base.edges[e];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        VRole r = VRole::Dummy;
        if (i == as[u].comp && j == as[v].comp) r = VRole::Computation;
        if (i == as[u].dummy && j == as[v].dummy) r = VRole::Trap;
        c.role[d.added_at(static_cast<int>(e), i, j)] = r;
      }
  }
  return c;
}

// All six permutations of {0,1,2} as (comp, trap, dummy).
inline const std::vector<PrimaryAssignment>& all_assignments() {
  static const std::vector<PrimaryAssignment> k = {
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  return k;
}

// input_positions: base input vertex -> forced computation position (0..2).
inline std::vector<std::vector<PrimaryAssignment>> assignment_choices(
    const Dtg& d, const std::map<int, int>& input_positions) {
  std::vector<std::vector<PrimaryAssignment>> choices(d.base.n);
  for (int v = 0; v < d.base.n; ++v) {
    auto it = input_positions.find(v);
    for (const auto& a : all_assignments()) {
      if (it != input_positions.end() && a.comp != it->second) continue;
      choices[v].push_back(a);
    }
  }
  return choices;
}

inline TrapColouring sample_colouring(const Dtg& d,
                                      const std::map<int, int>& input_positions,
                                      Rng& rng) {
  const auto choices = assignment_choices(d, input_positions);
  std::vector<PrimaryAssignment> as;
  for (int v = 0; v < d.base.n; ++v)
    as.push_back(choices[v][rng.below(choices[v].size())]);
  return colouring_from_assignment(d, as);
}

inline std::vector<TrapColouring> enumerate_colourings(
    const Dtg& d, const std::map<int, int>& input_positions) {
  const auto choices = assignment_choices(d, input_positions);
  std::vector<std::vector<PrimaryAssignment>> stack{{}};
  for (int v = 0; v < d.base.n; ++v) {
    std::vector<std::vector<PrimaryAssignment>> next;
    for (const auto& partial : stack)
      for (const auto& a : choices[v]) {
        auto ext = partial;
        ext.push_back(a);
        next.push_back(std::move(ext));
      }
    stack = std::move(next);
  }
  std::vector<TrapColouring> out;
  for (const auto& as : stack) out.push_back(colouring_from_assignment(d, as));
  return out;
}

// Checks every trap-colouring invariant directly on the DT(G) structure.
inline bool validate_colouring(const Dtg& d, const TrapColouring& c) {
  if (static_cast<int>(c.role.size()) != d.n) return false;
  for (int v = 0; v < d.base.n; ++v) {
    int counts[3] = {0, 0, 0};
    for (int p = 0; p < 3; ++p) counts[static_cast<int>(c.at(d.primary[v][p]))]++;
    if (counts[0] != 1 || counts[1] != 1 || counts[2] != 1) return false;
  }
  for (std::size_t e = 0; e < d.base.edges.size(); ++e) {
    const auto [u, v] = d.base.edges[e];
    int comps = 0, traps = 0, dummies = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int id = d.added_at(static_cast<int>(e), i, j);
        const VRole r = c.at(id);
        const VRole ru = c.at(d.primary[u][i]);
        const VRole rv = c.at(d.primary[v][j]);
        if (r == VRole::Computation) {
          ++comps;
          if (ru != VRole::Computation || rv != VRole::Computation) return false;
        } else if (r == VRole::Trap) {
          ++traps;
          if (ru != VRole::Dummy || rv != VRole::Dummy) return false;
        } else {
          ++dummies;
        }
      }
    if (comps != 1 || traps != 1 || dummies != 7) return false;
  }
  // Traps are linked only to dummies.
  for (int v = 0; v < d.n; ++v) {
    if (c.at(v) != VRole::Trap) continue;
    for (int w : d.neighbours(v))
      if (c.at(w) != VRole::Dummy) return false;
  }
  return true;
}

}  // namespace dmpqc
