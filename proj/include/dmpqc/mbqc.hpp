#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dmpqc/graph.hpp"
#include "dmpqc/qsim.hpp"
#include "dmpqc/rng.hpp"

namespace dmpqc {

// Honest local MBQC execution: the correctness oracle for every delegated
// protocol in this repository. Runs a pattern directly on a register (no
// parties, no network), with sampled, forced or fully enumerated outcomes.

struct MbqcResult {
  StateRegister reg;
  std::map<int, QubitId> output_ids;  // pattern vertex -> qubit id
  std::map<int, Bit> outcomes;        // measured vertex -> s(i)
  double probability = 1.0;           // branch probability (forced/enumerated)
};

namespace detail {

inline Bit xor_over(const std::set<int>& js, const std::map<int, Bit>& s) {
  Bit r = 0;
  for (int j : js) r ^= s.at(j);
  return r;
}

}  // namespace detail

// `input_ids[k]` names the register qubit carrying input vertex
// `pattern.g.inputs[k]`. Non-input vertices are allocated as |+> here.
// `forced`, when given, fixes each measured vertex's outcome (in flow order);
// probability of the branch is accumulated in the result.
inline MbqcResult run_mbqc(const Pattern& pattern, StateRegister reg,
                           const std::vector<QubitId>& input_ids, Rng* rng,
                           const std::map<int, Bit>* forced = nullptr) {
  pattern.validate();
  const auto& g = pattern.g;
  if (input_ids.size() != g.inputs.size())
    throw std::invalid_argument("register/input mismatch");

  std::map<int, QubitId> id_of;
  for (std::size_t k = 0; k < g.inputs.size(); ++k) {
    if (!reg.has(input_ids[k])) throw std::invalid_argument("missing input qubit");
    id_of[g.inputs[k]] = input_ids[k];
  }
  int serial = 0;
  for (int v = 0; v < g.n; ++v) {
    if (id_of.count(v)) continue;
    QubitId q{-1, v, serial++};
    reg.alloc(q, Prep::plus());
    id_of[v] = q;
  }
  for (auto [a, b] : g.edges) reg.apply_cz(id_of.at(a), id_of.at(b));

  const DependencySets deps = dependency_sets(pattern);
  MbqcResult res{std::move(reg), {}, {}, 1.0};
  for (int v : pattern.flow.order) {
    const Bit sx = detail::xor_over(deps.x.at(v), res.outcomes);
    const Bit sz = detail::xor_over(deps.z.at(v), res.outcomes);
    const AngleZ8 angle = corrected_angle(pattern.phi.at(v), sx, sz);
    Bit outcome;
    if (forced) {
      outcome = forced->at(v);
      const double p = res.reg.force(id_of.at(v), MeasBasis::rotated(angle), outcome);
      res.probability *= p;
      if (p == 0.0) return res;  // impossible branch; probability is 0
    } else {
      outcome = res.reg.measure(id_of.at(v), MeasBasis::rotated(angle), *rng);
    }
    res.outcomes[v] = outcome;
  }
  for (int v : g.outputs) {
    const Bit sx = detail::xor_over(deps.x.at(v), res.outcomes);
    const Bit sz = detail::xor_over(deps.z.at(v), res.outcomes);
    if (sx) res.reg.apply_x(id_of.at(v));
    if (sz) res.reg.apply_z(id_of.at(v));
    res.output_ids[v] = id_of.at(v);
  }
  return res;
}

// All measurement branches with nonzero probability.
inline std::vector<MbqcResult> enumerate_mbqc(const Pattern& pattern,
                                              const StateRegister& reg,
                                              const std::vector<QubitId>& input_ids,
                                              double cutoff = 1e-14) {
  const auto measured = pattern.flow.order;
  std::vector<MbqcResult> leaves;
  std::map<int, Bit> forced;
  std::function<void(std::size_t)> walk = [&](std::size_t depth) {
    if (depth == measured.size()) {
      MbqcResult r = run_mbqc(pattern, reg, input_ids, nullptr, &forced);
      if (r.probability > cutoff) leaves.push_back(std::move(r));
      return;
    }
    for (Bit o : {0, 1}) {
      forced[measured[depth]] = o;
      walk(depth + 1);
    }
    forced.erase(measured[depth]);
  };
  walk(0);
  return leaves;
}

}  // namespace dmpqc
