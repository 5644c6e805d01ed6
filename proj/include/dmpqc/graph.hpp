#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmpqc/angles.hpp"

namespace dmpqc {

// Open graph (V, E, I, O). Vertices are 0..n-1.
struct OpenGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> inputs;
  std::vector<int> outputs;

  bool is_input(int v) const {
    return std::find(inputs.begin(), inputs.end(), v) != inputs.end();
  }
  bool is_output(int v) const {
    return std::find(outputs.begin(), outputs.end(), v) != outputs.end();
  }

  std::vector<int> neighbours(int v) const {
    std::vector<int> r;
    for (auto [a, b] : edges) {
      if (a == v) r.push_back(b);
      if (b == v) r.push_back(a);
    }
    return r;
  }

  std::vector<int> measured() const {  // O^c in vertex order
    std::vector<int> r;
    for (int v = 0; v < n; ++v)
      if (!is_output(v)) r.push_back(v);
    return r;
  }

  int degree(int v) const { return static_cast<int>(neighbours(v).size()); }

  void validate() const {
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
      if (a == b) throw std::invalid_argument("self loop");
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw std::invalid_argument("edge endpoint out of range");
      auto key = std::minmax(a, b);
      if (!seen.insert(key).second) throw std::invalid_argument("duplicate edge");
    }
    for (int v : inputs)
      if (v < 0 || v >= n) throw std::invalid_argument("input out of range");
    for (int v : outputs)
      if (v < 0 || v >= n) throw std::invalid_argument("output out of range");
  }
};

// Causal flow: successor map f on (a subset of) O^c plus a total measurement
// order on O^c. Vertices outside dom(f) are terminal: their outcome feeds no
// flow correction (protocol code handles them explicitly).
struct Flow {
  std::map<int, int> f;
  std::vector<int> order;
};

struct Pattern {
  OpenGraph g;
  Flow flow;
  std::map<int, AngleZ8> phi;  // defined exactly on O^c

  void validate() const;
};

inline void validate_flow(const OpenGraph& g, const Flow& flow) {
  std::map<int, int> pos;
  for (std::size_t i = 0; i < flow.order.size(); ++i) {
    if (g.is_output(flow.order[i])) throw std::invalid_argument("order contains output");
    if (pos.count(flow.order[i])) throw std::invalid_argument("order repeats vertex");
    pos[flow.order[i]] = static_cast<int>(i);
  }
  if (pos.size() != g.measured().size())
    throw std::invalid_argument("order must cover O^c");

  std::set<int> images;
  for (auto [j, fj] : flow.f) {
    if (g.is_output(j)) throw std::invalid_argument("flow domain contains output");
    if (g.is_input(fj)) throw std::invalid_argument("flow image contains input");
    if (!images.insert(fj).second) throw std::invalid_argument("flow not injective");
    auto nb = g.neighbours(j);
    if (std::find(nb.begin(), nb.end(), fj) == nb.end())
      throw std::invalid_argument("flow image not a neighbour");
    // j measured before f(j) and before every other neighbour of f(j)
    if (pos.count(fj) && pos.at(fj) <= pos.at(j))
      throw std::invalid_argument("f(j) ordered before j");
    for (int w : g.neighbours(fj)) {
      if (w == j) continue;
      if (pos.count(w) && pos.at(w) <= pos.at(j))
        throw std::invalid_argument("neighbour of f(j) ordered before j");
    }
  }
}

inline void Pattern::validate() const {
  g.validate();
  validate_flow(g, flow);
  for (int v : g.measured())
    if (!phi.count(v)) throw std::invalid_argument("phi missing for measured vertex");
  for (auto [v, a] : phi) {
    (void)a;
    if (g.is_output(v)) throw std::invalid_argument("phi defined on output");
  }
}

struct DependencySets {
  std::map<int, std::set<int>> x;  // S_X
  std::map<int, std::set<int>> z;  // S_Z
};

// S_X(i) = { f^-1(i) } when defined; S_Z(i) = { j in dom f : i in N(f(j)), j != i }.
inline DependencySets dependency_sets(const Pattern& p) {
  validate_flow(p.g, p.flow);
  DependencySets d;
  for (int v = 0; v < p.g.n; ++v) {
    d.x[v] = {};
    d.z[v] = {};
  }
  for (auto [j, fj] : p.flow.f) {
    d.x[fj].insert(j);
    for (int w : p.g.neighbours(fj))
      if (w != j) d.z[w].insert(j);
  }
  return d;
}

// phi'(i) = (-1)^{s_X} phi(i) + pi s_Z
inline AngleZ8 corrected_angle(AngleZ8 phi, Bit s_x, Bit s_z) {
  return plus_pi(signed_angle(phi, s_x), s_z);
}

// ---------------------------------------------------------------------------
// Pattern description file format (structured text).
//
//   # comment
//   vertices N
//   edge A B
//   input V
//   output V
//   flow J K
//   phi V K8        (K8 = angle as an integer multiple of pi/4, mod 8)
//   order V1 V2 ...  (optional; defaults to ascending measured vertices)
// ---------------------------------------------------------------------------

inline Pattern parse_pattern(std::istream& in) {
  Pattern p;
  bool have_order = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto want_int = [&](const char* what) {
      long long v;
      if (!(ls >> v))
        throw std::invalid_argument("pattern line " + std::to_string(lineno) +
                                    ": expected " + what);
      return static_cast<int>(v);
    };
    if (key == "vertices") {
      p.g.n = want_int("vertex count");
    } else if (key == "edge") {
      int a = want_int("edge endpoint"), b = want_int("edge endpoint");
      p.g.edges.emplace_back(a, b);
    } else if (key == "input") {
      p.g.inputs.push_back(want_int("input vertex"));
    } else if (key == "output") {
      p.g.outputs.push_back(want_int("output vertex"));
    } else if (key == "flow") {
      int j = want_int("flow source"), k = want_int("flow target");
      p.flow.f[j] = k;
    } else if (key == "phi") {
      int v = want_int("phi vertex"), k = want_int("phi angle");
      p.phi[v] = AngleZ8(k);
    } else if (key == "order") {
      have_order = true;
      int v;
      while (ls >> v) p.flow.order.push_back(v);
    } else {
      throw std::invalid_argument("pattern line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    }
  }
  if (!have_order) p.flow.order = p.g.measured();
  p.validate();
  return p;
}

inline Pattern parse_pattern(const std::string& text) {
  std::istringstream in(text);
  return parse_pattern(in);
}

inline std::string serialize_pattern(const Pattern& p) {
  std::ostringstream out;
  out << "vertices " << p.g.n << "\n";
  for (auto [a, b] : p.g.edges) out << "edge " << a << " " << b << "\n";
  for (int v : p.g.inputs) out << "input " << v << "\n";
  for (int v : p.g.outputs) out << "output " << v << "\n";
  for (auto [j, k] : p.flow.f) out << "flow " << j << " " << k << "\n";
  for (auto [v, a] : p.phi) out << "phi " << v << " " << a.k() << "\n";
  out << "order";
  for (int v : p.flow.order) out << " " << v;
  out << "\n";
  return out.str();
}

// Dotted version of a pattern: every base edge (optionally skipping edges
// incident to inputs) is subdivided by a new vertex measured at angle 0,
// and the flow threads through the added vertices. This is the graph the
// trap-based protocols actually execute on, so it also serves as their
// correctness reference. Requires every base edge to lie on the flow.
inline Pattern dotted_pattern(const Pattern& base, bool skip_input_edges = false) {
  base.validate();
  Pattern d;
  d.g.n = base.g.n;
  d.g.inputs = base.g.inputs;
  d.g.outputs = base.g.outputs;
  d.phi = base.phi;

  std::map<std::pair<int, int>, bool> is_flow_edge;
  for (auto [u, fu] : base.flow.f) is_flow_edge[std::minmax(u, fu)] = true;
  for (auto [a, b] : base.g.edges)
    if (!is_flow_edge.count(std::minmax(a, b)))
      throw std::invalid_argument("dotted_pattern needs every edge on the flow");

  std::map<std::pair<int, int>, int> added;  // base edge -> added vertex
  for (auto [a, b] : base.g.edges) {
    const bool incident_input = base.g.is_input(a) || base.g.is_input(b);
    if (skip_input_edges && incident_input) {
      d.g.edges.emplace_back(a, b);
      continue;
    }
    const int m = d.g.n++;
    added[std::minmax(a, b)] = m;
    d.g.edges.emplace_back(a, m);
    d.g.edges.emplace_back(m, b);
    d.phi[m] = AngleZ8(0);
  }
  for (auto [u, fu] : base.flow.f) {
    auto it = added.find(std::minmax(u, fu));
    if (it == added.end()) {
      d.flow.f[u] = fu;
    } else {
      d.flow.f[u] = it->second;
      d.flow.f[it->second] = fu;
    }
  }
  for (int u : base.flow.order) {
    d.flow.order.push_back(u);
    auto fit = base.flow.f.find(u);
    if (fit == base.flow.f.end()) continue;
    auto it = added.find(std::minmax(u, fit->second));
    if (it != added.end()) d.flow.order.push_back(it->second);
  }
  d.validate();
  return d;
}

// Line pattern on n vertices: 0 - 1 - ... - n-1, input 0, output n-1,
// chain flow, given base angles on the measured vertices.
inline Pattern line_pattern(int n, const std::vector<AngleZ8>& angles) {
  if (static_cast<int>(angles.size()) != n - 1)
    throw std::invalid_argument("need n-1 angles for a line pattern");
  Pattern p;
  p.g.n = n;
  for (int v = 0; v + 1 < n; ++v) p.g.edges.emplace_back(v, v + 1);
  p.g.inputs = {0};
  p.g.outputs = {n - 1};
  for (int v = 0; v + 1 < n; ++v) {
    p.flow.f[v] = v + 1;
    p.flow.order.push_back(v);
    p.phi[v] = angles[v];
  }
  p.validate();
  return p;
}

}  // namespace dmpqc
