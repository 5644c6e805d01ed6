#pragma once

// Shared helpers for protocol-level tests: oracle runs and id-aligned
// register comparison.

#include <map>

#include "dmpqc/mbqc.hpp"

namespace testutil {

using namespace dmpqc;

// Honest local MBQC run used as the correctness oracle.
inline MbqcResult mbqc_oracle(const Pattern& p, const std::map<int, Prep>& inputs) {
  Rng rng(0xa11ce);
  StateRegister reg;
  std::vector<QubitId> ids;
  for (std::size_t k = 0; k < p.g.inputs.size(); ++k) {
    QubitId q{9, p.g.inputs[k], static_cast<int>(k)};
    reg.alloc(q, inputs.at(p.g.inputs[k]));
    ids.push_back(q);
  }
  return run_mbqc(p, std::move(reg), ids, &rng);
}

// |<a|b>| where b's qubits are renamed so that vertex v in `b_ids` matches
// `a_ids` at the same vertex.
inline double overlap_by_vertex(const StateRegister& a,
                                const std::map<int, QubitId>& a_ids,
                                const StateRegister& b,
                                const std::map<int, QubitId>& b_ids) {
  StateRegister renamed = b;
  int stash = 0;
  // Two passes through temporary names to avoid collisions.
  std::map<int, QubitId> temp;
  for (const auto& [v, id] : b_ids) {
    QubitId t{-7, v, stash++};
    renamed.rename(id, t);
    temp[v] = t;
  }
  for (const auto& [v, t] : temp) renamed.rename(t, a_ids.at(v));
  return overlap(a, renamed);
}

}  // namespace testutil
