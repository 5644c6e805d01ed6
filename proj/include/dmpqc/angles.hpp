#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dmpqc/rng.hpp"

namespace dmpqc {

// Angle in Theta = { k*pi/4 : k = 0..7 }, stored as the residue k mod 8.
// All protocol angle arithmetic stays in Z8; conversion to radians happens
// only when a gate matrix is built.
class AngleZ8 {
public:
  constexpr AngleZ8() : k_(0) {}
  constexpr explicit AngleZ8(int k) : k_(((k % 8) + 8) % 8) {}

  constexpr int k() const { return k_; }
  double radians() const { return static_cast<double>(k_) * M_PI / 4.0; }

  friend constexpr AngleZ8 operator+(AngleZ8 a, AngleZ8 b) {
    return AngleZ8(a.k_ + b.k_);
  }
  friend constexpr AngleZ8 operator-(AngleZ8 a, AngleZ8 b) {
    return AngleZ8(a.k_ - b.k_);
  }
  constexpr AngleZ8 operator-() const { return AngleZ8(-k_); }
  friend constexpr bool operator==(AngleZ8 a, AngleZ8 b) { return a.k_ == b.k_; }
  friend constexpr bool operator!=(AngleZ8 a, AngleZ8 b) { return a.k_ != b.k_; }
  friend constexpr bool operator<(AngleZ8 a, AngleZ8 b) { return a.k_ < b.k_; }

  static AngleZ8 random(Rng& rng) { return AngleZ8(static_cast<int>(rng.below(8))); }

  // Angle is Clifford iff it is a multiple of pi/2.
  constexpr bool is_clifford() const { return k_ % 2 == 0; }

private:
  int k_;
};

inline constexpr AngleZ8 kPi = AngleZ8(4);
inline constexpr AngleZ8 kPiHalf = AngleZ8(2);

using Bit = int;  // always 0 or 1

inline constexpr AngleZ8 add(AngleZ8 a, AngleZ8 b) { return a + b; }

// a if s = 0, -a mod 8 if s = 1.
inline constexpr AngleZ8 signed_angle(AngleZ8 a, Bit s) { return s ? -a : a; }

// a + pi*b.
inline constexpr AngleZ8 plus_pi(AngleZ8 a, Bit b) { return b ? a + kPi : a; }

// Per-qubit Pauli one-time-pad key.
struct QotpPair {
  Bit x = 0;
  Bit z = 0;
};

struct QotpKey {
  std::vector<QotpPair> pairs;
};

// Canonical single-qubit residual encryption Z(zeta) X^x (global phase
// dropped). This is the closure of Pauli keys and Z-rotations under
// composition, which is what the orchestrator tracks per DT(G) qubit.
struct QubitKey {
  AngleZ8 zeta{};  // Z-rotation component, includes Z = Z(pi)
  Bit x = 0;

  // Left-compose with another key: result = Z(k.zeta) X^{k.x} * this.
  // X^a Z(b) = Z(-b) X^a, so Z(z2)X^{x2} Z(z1)X^{x1} = Z(z2 + (-1)^{x2} z1) X^{x1^x2}.
  QubitKey then(const QubitKey& outer) const {
    QubitKey r;
    r.zeta = outer.zeta + signed_angle(zeta, outer.x);
    r.x = x ^ outer.x;
    return r;
  }

  QubitKey inverse() const {
    // (Z(z) X^x)^{-1} = X^x Z(-z) = Z((-1)^{x+1} z)... X^x Z(-z) = Z((-1)^x -z) X^x
    QubitKey r;
    r.zeta = signed_angle(-zeta, x);
    r.x = x;
    return r;
  }

  bool identity() const { return zeta.k() == 0 && x == 0; }
};

inline QubitKey key_from_pauli_x(Bit b) { return QubitKey{AngleZ8(0), b}; }
inline QubitKey key_from_pauli_z(Bit b) { return QubitKey{b ? kPi : AngleZ8(0), 0}; }
inline QubitKey key_from_z_rot(AngleZ8 zeta) { return QubitKey{zeta, 0}; }

}  // namespace dmpqc
