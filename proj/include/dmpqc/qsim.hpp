#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "dmpqc/angles.hpp"
#include "dmpqc/rng.hpp"

namespace dmpqc {

using Complex = std::complex<double>;

// Opaque qubit identifier: owning party, a position tag whose meaning is
// protocol-specific (graph vertex, gadget slot, ...) and a serial to keep
// ids unique across a whole run. Never reused after measurement.
struct QubitId {
  std::int32_t party = 0;
  std::int32_t tag = 0;
  std::int32_t serial = 0;

  friend bool operator<(const QubitId& a, const QubitId& b) {
    return std::tie(a.party, a.tag, a.serial) < std::tie(b.party, b.tag, b.serial);
  }
  friend bool operator==(const QubitId& a, const QubitId& b) {
    return a.party == b.party && a.tag == b.tag && a.serial == b.serial;
  }
  friend bool operator!=(const QubitId& a, const QubitId& b) { return !(a == b); }

  std::string str() const {
    return "q" + std::to_string(party) + ":" + std::to_string(tag) + ":" +
           std::to_string(serial);
  }
};

enum class Init { Zero, One, Plus, PlusTheta, Minus, PlusI, MinusI, Raw };

// Single-qubit pure preparation spec: a named axis state, a rotated plus
// state, or raw amplitudes.
struct Prep {
  Init init = Init::Plus;
  AngleZ8 theta{};
  std::complex<double> a0{0.0, 0.0}, a1{0.0, 0.0};  // used by Raw only

  static Prep zero() { return {Init::Zero, AngleZ8(0)}; }
  static Prep one() { return {Init::One, AngleZ8(0)}; }
  static Prep plus() { return {Init::Plus, AngleZ8(0)}; }
  static Prep minus() { return {Init::Minus, AngleZ8(0)}; }
  static Prep plus_i() { return {Init::PlusI, AngleZ8(0)}; }
  static Prep minus_i() { return {Init::MinusI, AngleZ8(0)}; }
  static Prep plus_theta(AngleZ8 t) { return {Init::PlusTheta, t}; }
  static Prep dummy(Bit d) { return d ? one() : zero(); }
  static Prep raw(std::complex<double> a0, std::complex<double> a1) {
    Prep p;
    p.init = Init::Raw;
    p.a0 = a0;
    p.a1 = a1;
    return p;
  }
  static Prep random_pure(Rng& rng) {
    const std::complex<double> a0(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
    const std::complex<double> a1(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
    const double n = std::sqrt(std::norm(a0) + std::norm(a1));
    return raw(a0 / n, a1 / n);
  }

  // The spec with Z(k.zeta) X^{k.x} applied (used to encrypt descriptors
  // before they are materialized).
  Prep transformed(const QubitKey& k) const;
};

struct MeasBasis {
  bool computational = true;
  AngleZ8 delta{};  // rotated basis {|+_delta>, |-_delta>} when !computational

  static MeasBasis comp() { return {true, AngleZ8(0)}; }
  static MeasBasis rotated(AngleZ8 d) { return {false, d}; }
};

// Exact dense pure-state register over named qubits. Measured qubits are
// removed so the live set stays small; norm is maintained to ~1e-15.
class StateRegister {
public:
  explicit StateRegister(int cap = 24) : cap_(cap) { amps_ = {Complex(1.0, 0.0)}; }

  int num_qubits() const { return static_cast<int>(slots_.size()); }
  int cap() const { return cap_; }
  void set_cap(int cap) { cap_ = cap; }

  bool has(const QubitId& id) const { return index_.count(id) != 0; }

  std::vector<QubitId> qubits() const { return slots_; }

  const std::vector<Complex>& amplitudes() const { return amps_; }

  void alloc(const QubitId& id, const Prep& prep) {
    if (has(id)) throw std::invalid_argument("duplicate qubit id " + id.str());
    if (num_qubits() + 1 > cap_)
      throw std::runtime_error("qubit cap exceeded (" + std::to_string(cap_) + ")");
    const auto [a0, a1] = prep_amps(prep);
    const std::size_t n = amps_.size();
    std::vector<Complex> next(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = amps_[i] * a0;
      next[i + n] = amps_[i] * a1;  // new qubit occupies the top bit
    }
    amps_ = std::move(next);
    index_[id] = static_cast<int>(slots_.size());
    slots_.push_back(id);
  }

  void apply_x(const QubitId& q) { apply_1q(q, {0, 1, 1, 0}); }
  void apply_y(const QubitId& q) {
    apply_1q(q, {Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0)});
  }
  void apply_z(const QubitId& q) { apply_1q(q, {1, 0, 0, -1}); }
  void apply_h(const QubitId& q) {
    const double s = 1.0 / std::sqrt(2.0);
    apply_1q(q, {s, s, s, -s});
  }
  void apply_zrot(const QubitId& q, AngleZ8 theta) {
    apply_1q(q, {1, 0, 0, std::polar(1.0, theta.radians())});
  }

  void apply_pauli(const QubitId& q, char p) {
    switch (p) {
      case 'I': return;
      case 'X': apply_x(q); return;
      case 'Y': apply_y(q); return;
      case 'Z': apply_z(q); return;
    }
    throw std::invalid_argument("unknown Pauli");
  }

  // Z(zeta) X^x
  void apply_key(const QubitId& q, const QubitKey& k) {
    if (k.x) apply_x(q);
    if (k.zeta.k() != 0) apply_zrot(q, k.zeta);
  }

  void apply_cnot(const QubitId& ctrl, const QubitId& tgt) {
    const int c = slot(ctrl), t = slot(tgt);
    if (c == t) throw std::invalid_argument("coincident two-qubit targets");
    const std::size_t cm = 1ull << c, tm = 1ull << t;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
  }

  void apply_cz(const QubitId& a, const QubitId& b) {
    const int sa = slot(a), sb = slot(b);
    if (sa == sb) throw std::invalid_argument("coincident two-qubit targets");
    const std::size_t am = 1ull << sa, bm = 1ull << sb;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & am) && (i & bm)) amps_[i] = -amps_[i];
  }

  // Probability that measuring `q` in `basis` yields outcome 0.
  double prob_zero(const QubitId& q, const MeasBasis& basis) const {
    StateRegister tmp(*this);
    tmp.rotate_to_comp(q, basis);
    const std::size_t m = 1ull << tmp.slot(q);
    double p0 = 0.0;
    for (std::size_t i = 0; i < tmp.amps_.size(); ++i)
      if (!(i & m)) p0 += std::norm(tmp.amps_[i]);
    return p0;
  }

  // Sampled measurement; collapses, renormalizes and removes the qubit.
  Bit measure(const QubitId& q, const MeasBasis& basis, Rng& rng) {
    const double p0 = prob_zero(q, basis);
    const Bit outcome = rng.uniform() < p0 ? 0 : 1;
    force(q, basis, outcome);
    return outcome;
  }

  // Forces `outcome`; returns its probability (state collapsed accordingly).
  // Probability may be 0, in which case the caller must discard the branch.
  double force(const QubitId& q, const MeasBasis& basis, Bit outcome) {
    rotate_to_comp(q, basis);
    const int s = slot(q);
    const std::size_t m = 1ull << s;
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if (((i & m) != 0) == (outcome == 1)) p += std::norm(amps_[i]);
    if (p < 1e-300) return 0.0;
    const double inv = 1.0 / std::sqrt(p);
    const std::size_t n = amps_.size() / 2;
    std::vector<Complex> next(n);
    const std::size_t low = m - 1;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t src = ((i & ~low) << 1) | (i & low);
      if (outcome == 1) src |= m;
      next[i] = amps_[src] * inv;
    }
    amps_ = std::move(next);
    drop_slot(q);
    return p;
  }

  double norm_sq() const {
    double n = 0.0;
    for (const auto& a : amps_) n += std::norm(a);
    return n;
  }

  // |<a|b>| over the shared qubit set; throws if the sets differ.
  friend double overlap(const StateRegister& a, const StateRegister& b) {
    if (a.slots_.size() != b.slots_.size())
      throw std::invalid_argument("mismatched qubit sets");
    std::vector<int> perm(a.slots_.size());
    for (std::size_t s = 0; s < a.slots_.size(); ++s) {
      auto it = b.index_.find(a.slots_[s]);
      if (it == b.index_.end()) throw std::invalid_argument("mismatched qubit sets");
      perm[s] = it->second;
    }
    Complex ip(0, 0);
    for (std::size_t i = 0; i < a.amps_.size(); ++i) {
      std::size_t j = 0;
      for (std::size_t s = 0; s < perm.size(); ++s)
        if (i & (1ull << s)) j |= 1ull << perm[s];
      ip += std::conj(a.amps_[i]) * b.amps_[j];
    }
    return std::abs(ip);
  }

  friend bool equal_up_to_phase(const StateRegister& a, const StateRegister& b,
                                double tol) {
    return overlap(a, b) >= 1.0 - tol;
  }

  // Renames a qubit in place (ownership transfer bookkeeping).
  void rename(const QubitId& from, const QubitId& to) {
    if (has(to)) throw std::invalid_argument("rename target exists");
    const int s = slot(from);
    index_.erase(from);
    index_[to] = s;
    slots_[s] = to;
  }

private:
  int slot(const QubitId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown qubit " + id.str());
    return it->second;
  }

  static std::pair<Complex, Complex> prep_amps(const Prep& p) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (p.init) {
      case Init::Zero: return {1.0, 0.0};
      case Init::One: return {0.0, 1.0};
      case Init::Plus: return {s, s};
      case Init::Minus: return {s, -s};
      case Init::PlusI: return {s, Complex(0, s)};
      case Init::MinusI: return {s, Complex(0, -s)};
      case Init::PlusTheta: return {s, s * std::polar(1.0, p.theta.radians())};
      case Init::Raw: return {p.a0, p.a1};
    }
    throw std::invalid_argument("bad prep");
  }

  void apply_1q(const QubitId& q, const std::array<Complex, 4>& u) {
    const std::size_t m = 1ull << slot(q);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & m) continue;
      const Complex a0 = amps_[i], a1 = amps_[i | m];
      amps_[i] = u[0] * a0 + u[1] * a1;
      amps_[i | m] = u[2] * a0 + u[3] * a1;
    }
  }

  // Maps {|+_d>, |-_d>} onto {|0>, |1>} so a computational readout follows.
  void rotate_to_comp(const QubitId& q, const MeasBasis& basis) {
    if (basis.computational) return;
    apply_zrot(q, -basis.delta);
    apply_h(q);
  }

  void drop_slot(const QubitId& id) {
    const int s = slot(id);
    index_.erase(id);
    slots_.erase(slots_.begin() + s);
    for (auto& [k, v] : index_)
      if (v > s) --v;
  }

  int cap_;
  std::vector<Complex> amps_;
  std::vector<QubitId> slots_;  // slot s <-> bit s of the amplitude index
  std::map<QubitId, int> index_;
};

inline Prep Prep::transformed(const QubitKey& k) const {
  if (k.identity()) return *this;
  // Convert to raw amplitudes, apply X then Z(zeta).
  const double s = 1.0 / std::sqrt(2.0);
  Complex b0, b1;
  switch (init) {
    case Init::Zero: b0 = 1; b1 = 0; break;
    case Init::One: b0 = 0; b1 = 1; break;
    case Init::Plus: b0 = s; b1 = s; break;
    case Init::Minus: b0 = s; b1 = -s; break;
    case Init::PlusI: b0 = s; b1 = Complex(0, s); break;
    case Init::MinusI: b0 = s; b1 = Complex(0, -s); break;
    case Init::PlusTheta: b0 = s; b1 = s * std::polar(1.0, theta.radians()); break;
    case Init::Raw: b0 = a0; b1 = a1; break;
  }
  if (k.x) std::swap(b0, b1);
  b1 *= std::polar(1.0, k.zeta.radians());
  return raw(b0, b1);
}

// One outcome of an exact single-measurement branch enumeration.
struct BranchEntry {
  Bit outcome;
  double probability;
  StateRegister state;
};

// Both branches with exact probabilities; branches below the degeneracy
// cutoff are omitted so near-zero states are never renormalized.
inline std::vector<BranchEntry> branch(const StateRegister& reg, const QubitId& q,
                                       const MeasBasis& basis,
                                       double cutoff = 1e-14) {
  std::vector<BranchEntry> out;
  for (Bit o : {0, 1}) {
    StateRegister s(reg);
    const double p = s.force(q, basis, o);
    if (p > cutoff) out.push_back(BranchEntry{o, p, std::move(s)});
  }
  return out;
}

enum class QotpDir { Encrypt, Decrypt };

// Per-qubit quantum one-time pad. Encrypt applies Z^{k_Z} X^{k_X}, decrypt
// applies X^{k_X} Z^{k_Z}, so decrypt(encrypt(.)) is the identity.
inline void qotp_apply(StateRegister& reg, const std::vector<QubitId>& qubits,
                       const QotpKey& key, QotpDir dir) {
  if (qubits.size() != key.pairs.size())
    throw std::invalid_argument("qotp key / qubit mismatch");
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    const QotpPair& p = key.pairs[i];
    if (dir == QotpDir::Encrypt) {
      if (p.x) reg.apply_x(qubits[i]);
      if (p.z) reg.apply_z(qubits[i]);
    } else {
      if (p.z) reg.apply_z(qubits[i]);
      if (p.x) reg.apply_x(qubits[i]);
    }
  }
}

}  // namespace dmpqc
