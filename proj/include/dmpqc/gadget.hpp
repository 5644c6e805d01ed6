#pragma once

#include <map>
#include <string>
#include <vector>

#include "dmpqc/graph.hpp"

namespace dmpqc {

// ---------------------------------------------------------------------------
// The H/I gadget: a fixed 9-qubit two-line measurement pattern whose single
// free angle (the first bottom-line measurement, which has no X-dependency)
// selects between applying H (angle 0, used to create dummies) or I (angle
// -pi/2) to the top input. Graph, flow and every other angle are identical
// for both choices, and all angles are Clifford.
//
// Layout (vertex ids):
//
//     0 ----- 1 ----- 2        top: input 0, output 2
//     |        \
//     |         \
//  3--4--5--6--7--8            bottom: aux input 3, terminal 8
//
// Sequence realized (up to tracked Paulis): the bottom wire turns the aux
// |+> into Z(pi/2)HZ(pi/2)|psi_c> in two steps, idles through three
// -pi/2 steps ((HS)^3 is a phase), the verticals apply CZ then, with the
// two top steps around the second vertical, CNOT(bottom -> top); the
// terminal bottom measurement in the |+/-> basis selects the correction.
// ---------------------------------------------------------------------------

struct HiGadget {
  Pattern pattern;
  bool apply_h = false;
  int top_input = 0;
  int output = 2;
  int bottom_input = 3;
  int terminal = 8;       // outcome feeds the correction table, not the flow
  int next_to_last = 1;   // next-to-last measured vertex (attack target)
};

inline HiGadget build_hi_gadget(bool apply_h) {
  HiGadget g;
  g.apply_h = apply_h;
  Pattern& p = g.pattern;
  p.g.n = 9;
  p.g.edges = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {0, 5}, {1, 8}};
  p.g.inputs = {0, 3};
  p.g.outputs = {2};
  p.flow.f = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}};
  p.flow.order = {3, 4, 0, 5, 6, 7, 1, 8};
  p.phi[0] = AngleZ8(0);
  p.phi[1] = AngleZ8(0);
  p.phi[3] = apply_h ? AngleZ8(0) : AngleZ8(-2);  // the one free angle
  p.phi[4] = AngleZ8(2);
  p.phi[5] = AngleZ8(-2);
  p.phi[6] = AngleZ8(-2);
  p.phi[7] = AngleZ8(-2);
  p.phi[8] = AngleZ8(0);
  p.validate();
  return g;
}

// Correction-table row selected by the terminal (|+/->-basis) outcome
// o = s(8): for H, o = 0 -> X and o = 1 -> Z; for I the correction is XZ
// regardless of o. Composes with the standard flow byproducts
// X^{s(1)} Z^{s(0)} into the full residual on the output.
inline QubitKey gadget_table_correction(bool apply_h, Bit o) {
  if (apply_h) return QubitKey{o ? kPi : AngleZ8(0), o ^ 1};
  return QubitKey{kPi, 1};
}

inline QubitKey gadget_output_key(bool apply_h, const std::map<int, Bit>& s) {
  const QubitKey flow_byproduct{s.at(0) ? kPi : AngleZ8(0), s.at(1)};
  return flow_byproduct.then(gadget_table_correction(apply_h, s.at(8)));
}

// The non-compliant Appendix-style gadget: a 5-qubit line where H vs I is
// selected by three X-dependent angles (0,0,0,0 vs 0,pi/2,pi/2,pi/2). It
// computes correctly but fails the colouring-invariance constraint.
inline Pattern noncompliant_line_gadget(bool apply_h) {
  const AngleZ8 a = apply_h ? AngleZ8(2) : AngleZ8(0);
  return line_pattern(5, {AngleZ8(0), a, a, a});
}

// ---------------------------------------------------------------------------
// Structural validator for DBQC measurement patterns (the constraints under
// which a blind-but-unverified preparation stays safe):
//   (a) every measurement angle is Clifford;
//   (b) graph, flow and measurement order are identical across variants;
//   (c) the angle of every X-dependent vertex is identical across variants.
// ---------------------------------------------------------------------------

struct PatternConstraintReport {
  bool pass = true;
  std::vector<std::string> violations;

  void fail(std::string why) {
    pass = false;
    violations.push_back(std::move(why));
  }
};

inline PatternConstraintReport validate_pattern_constraints(
    const std::vector<Pattern>& variants) {
  PatternConstraintReport rep;
  if (variants.empty()) {
    rep.fail("no pattern variants supplied");
    return rep;
  }
  for (std::size_t i = 0; i < variants.size(); ++i) {
    for (auto [v, angle] : variants[i].phi)
      if (!angle.is_clifford())
        rep.fail("variant " + std::to_string(i) + ": non-Clifford angle " +
                 std::to_string(angle.k()) + " at vertex " + std::to_string(v));
  }
  const Pattern& ref = variants.front();
  for (std::size_t i = 1; i < variants.size(); ++i) {
    const Pattern& p = variants[i];
    if (p.g.n != ref.g.n || p.g.edges != ref.g.edges || p.g.inputs != ref.g.inputs ||
        p.g.outputs != ref.g.outputs)
      rep.fail("variant " + std::to_string(i) + ": graph differs");
    if (p.flow.f != ref.flow.f || p.flow.order != ref.flow.order)
      rep.fail("variant " + std::to_string(i) + ": flow differs");
  }
  // X-dependent vertices are exactly the flow images.
  std::set<int> x_dependent;
  for (auto [j, fj] : ref.flow.f) {
    (void)j;
    if (!ref.g.is_output(fj)) x_dependent.insert(fj);
  }
  for (int v : x_dependent) {
    for (std::size_t i = 1; i < variants.size(); ++i) {
      if (!variants[i].phi.count(v) || !ref.phi.count(v)) continue;
      if (variants[i].phi.at(v) != ref.phi.at(v))
        rep.fail("X-dependent vertex " + std::to_string(v) +
                 " changes angle across variants");
    }
  }
  return rep;
}

}  // namespace dmpqc
