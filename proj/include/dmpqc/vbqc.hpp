#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <vector>

#include "dmpqc/dtg.hpp"
#include "dmpqc/ubqc.hpp"

namespace dmpqc {

// ---------------------------------------------------------------------------
// VBQC structure: the computation sub-graph of a coloured DT(G), its flow,
// and the server-side measurement order. The base-graph flow is induced
// along the computation chain, added computation vertices sit between their
// endpoints with base angle 0, and trap/dummy members of each set are
// measured in random order within the set.
//
// Only base graphs whose every edge is a flow edge are supported here (the
// line graphs used throughout); this is checked at build time.
// ---------------------------------------------------------------------------

struct VbqcStructure {
  Dtg dtg;
  Pattern base;
  TrapColouring colouring;

  std::map<int, int> comp_of_base;               // base vertex -> DT comp id
  std::map<int, int> added_comp_of_edge;         // base edge -> DT comp id
  std::map<int, int> chain_flow;                 // DT comp id -> successor
  std::map<int, AngleZ8> chain_phi;              // DT comp id -> base angle
  std::map<int, std::set<int>> sx, sz;           // dependency sets on DT ids
  std::vector<int> server_order;                 // all server-measured DT ids
  std::vector<int> returned;                     // output-location DT ids
};

inline VbqcStructure build_vbqc_structure(const Pattern& base, const Dtg& dtg,
                                          const TrapColouring& colouring, Rng& rng) {
  base.validate();
  if (!validate_colouring(dtg, colouring))
    throw std::invalid_argument("invalid trap colouring");
  VbqcStructure s;
  s.dtg = dtg;
  s.base = base;
  s.colouring = colouring;

  for (int v = 0; v < dtg.base.n; ++v)
    for (int p = 0; p < 3; ++p)
      if (colouring.at(dtg.primary[v][p]) == VRole::Computation)
        s.comp_of_base[v] = dtg.primary[v][p];
  for (std::size_t e = 0; e < dtg.base.edges.size(); ++e)
    for (int cell = 0; cell < 9; ++cell)
      if (colouring.at(dtg.added[e][cell]) == VRole::Computation)
        s.added_comp_of_edge[static_cast<int>(e)] = dtg.added[e][cell];

  // Chain flow mirrors the base flow through the added computation vertices.
  auto edge_index = [&](int u, int v) {
    for (std::size_t e = 0; e < dtg.base.edges.size(); ++e) {
      auto [a, b] = dtg.base.edges[e];
      if ((a == u && b == v) || (a == v && b == u)) return static_cast<int>(e);
    }
    throw std::invalid_argument("flow edge missing from base graph");
  };
  std::set<int> flow_edges;
  for (auto [u, fu] : base.flow.f) {
    const int e = edge_index(u, fu);
    flow_edges.insert(e);
    s.chain_flow[s.comp_of_base.at(u)] = s.added_comp_of_edge.at(e);
    s.chain_flow[s.added_comp_of_edge.at(e)] = s.comp_of_base.at(fu);
  }
  if (flow_edges.size() != dtg.base.edges.size())
    throw std::invalid_argument("vbqc structure needs every base edge on the flow");

  for (auto [v, angle] : base.phi) s.chain_phi[s.comp_of_base.at(v)] = angle;
  for (auto [e, id] : s.added_comp_of_edge) {
    (void)e;
    s.chain_phi[id] = AngleZ8(0);  // added qubits carry base angle 0
  }

  // Dependency sets over the computation chain (the dotted base graph).
  std::map<int, std::set<int>> chain_nbrs;
  for (auto [u, fu] : base.flow.f) {
    const int e = edge_index(u, fu);
    const int cu = s.comp_of_base.at(u), a = s.added_comp_of_edge.at(e),
              cv = s.comp_of_base.at(fu);
    chain_nbrs[cu].insert(a);
    chain_nbrs[a].insert(cu);
    chain_nbrs[a].insert(cv);
    chain_nbrs[cv].insert(a);
  }
  for (auto [j, fj] : s.chain_flow) {
    s.sx[fj].insert(j);
    for (int w : chain_nbrs[fj])
      if (w != j) s.sz[w].insert(j);
  }

  // Server measurement order: for each base vertex in base-flow order, its
  // primary set, then the added set of its flow edge. Within a set the
  // order is random. Output base-locations are returned, not measured.
  auto shuffled = [&rng](std::vector<int> v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[rng.below(i)]);
    return v;
  };
  for (int u : base.flow.order) {
    std::vector<int> pset(dtg.primary[u].begin(), dtg.primary[u].end());
    for (int id : shuffled(pset)) s.server_order.push_back(id);
    auto it = base.flow.f.find(u);
    if (it != base.flow.f.end()) {
      const int e = edge_index(u, it->second);
      std::vector<int> aset(dtg.added[e].begin(), dtg.added[e].end());
      for (int id : shuffled(aset)) s.server_order.push_back(id);
    }
  }
  for (int v : base.g.outputs)
    for (int p = 0; p < 3; ++p) s.returned.push_back(dtg.primary[v][p]);
  return s;
}

// ---------------------------------------------------------------------------
// Secret parameters and the measurement-angle formulas
// ---------------------------------------------------------------------------

struct VbqcParams {
  std::map<int, AngleZ8> theta;  // per non-dummy DT vertex
  std::map<int, Bit> r;          // per non-dummy DT vertex
  std::map<int, Bit> d;          // per dummy DT vertex
  std::map<int, Bit> a_chain;    // per chain vertex; nonzero only on inputs
};

struct VbqcSecrets {
  TrapColouring colouring;
  VbqcParams params;
  std::map<int, Bit> a_base;  // per base input vertex

  static VbqcSecrets sample(const Dtg& dtg, const TrapColouring& colouring, Rng& rng) {
    VbqcSecrets s;
    s.colouring = colouring;
    for (int v = 0; v < dtg.n; ++v) {
      if (colouring.is_dummy(v)) {
        s.params.d[v] = rng.bit();
      } else {
        s.params.theta[v] = AngleZ8::random(rng);
        s.params.r[v] = rng.bit();
      }
    }
    for (int v : dtg.base.inputs) s.a_base[v] = rng.bit();
    return s;
  }
};

// Parity of the dummy values adjacent to v in DT(G).
inline Bit dummy_parity(const VbqcStructure& s, const VbqcParams& p, int v) {
  Bit c = 0;
  for (int w : s.dtg.neighbours(v))
    if (s.colouring.is_dummy(w)) c ^= p.d.at(w);
  return c;
}

inline Bit a_of_chain(const VbqcParams& p, int v) {
  auto it = p.a_chain.find(v);
  return it == p.a_chain.end() ? 0 : it->second;
}

// Measurement angle for a computation-chain vertex:
// (-1)^{s'_X} phi + pi s'_Z + theta + pi r + pi * (adjacent dummy parity).
inline AngleZ8 vbqc_delta_comp(const VbqcStructure& s, const VbqcParams& p, int v,
                               const std::map<int, Bit>& srec) {
  auto xor_dep = [&](const std::map<int, std::set<int>>& deps) {
    Bit acc = 0;
    auto it = deps.find(v);
    if (it == deps.end()) return acc;
    for (int j : it->second) {
      if (!srec.count(j)) throw std::logic_error("unmeasured dependency");
      acc ^= srec.at(j);
    }
    return acc;
  };
  Bit a_pred = 0;
  for (auto [j, fj] : s.chain_flow)
    if (fj == v) a_pred = a_of_chain(p, j);
  const Bit sxp = a_of_chain(p, v) ^ xor_dep(s.sx);
  const Bit szp = a_pred ^ xor_dep(s.sz);
  return corrected_angle(s.chain_phi.at(v), sxp, szp) + p.theta.at(v) +
         (p.r.at(v) ? kPi : AngleZ8(0)) + (dummy_parity(s, p, v) ? kPi : AngleZ8(0));
}

// Trap angle: theta + pi r + pi * (adjacent dummy parity); base angle 0.
inline AngleZ8 vbqc_delta_trap(const VbqcStructure& s, const VbqcParams& p, int v) {
  return p.theta.at(v) + (p.r.at(v) ? kPi : AngleZ8(0)) +
         (dummy_parity(s, p, v) ? kPi : AngleZ8(0));
}

// Residual encryption Z(zeta) X^x on the computation qubit of an output
// base-location, consumed by the holder to decrypt.
inline QubitKey vbqc_output_key(const VbqcStructure& s, const VbqcParams& p,
                                int base_out, const std::map<int, Bit>& srec) {
  const int c = s.comp_of_base.at(base_out);
  auto xor_dep = [&](const std::map<int, std::set<int>>& deps) {
    Bit acc = 0;
    auto it = deps.find(c);
    if (it == deps.end()) return acc;
    for (int j : it->second) acc ^= srec.at(j);
    return acc;
  };
  Bit a_pred = 0;
  for (auto [j, fj] : s.chain_flow)
    if (fj == c) a_pred = a_of_chain(p, j);
  const Bit sxp = a_of_chain(p, c) ^ xor_dep(s.sx);
  const Bit szp = a_pred ^ xor_dep(s.sz);
  const Bit cpar = dummy_parity(s, p, c);
  return QubitKey{p.theta.at(c) + ((szp ^ cpar) ? kPi : AngleZ8(0)), sxp};
}

// Preparation descriptors for the whole DT(G): dummies |d>, non-dummies
// |+_theta>, the input qubit at each input base-location Q-OTPed with
// Z(theta) X^a around the caller-provided state.
inline std::map<int, Prep> prepare_vbqc_state(const Dtg& dtg, const VbqcSecrets& sec,
                                              const std::map<int, Prep>& inputs) {
  std::map<int, Prep> preps;
  std::map<int, int> comp_of_base;
  for (int v = 0; v < dtg.base.n; ++v)
    for (int pos = 0; pos < 3; ++pos)
      if (sec.colouring.at(dtg.primary[v][pos]) == VRole::Computation)
        comp_of_base[v] = dtg.primary[v][pos];
  for (int v = 0; v < dtg.n; ++v) {
    if (sec.colouring.is_dummy(v)) {
      preps[v] = Prep::dummy(sec.params.d.at(v));
    } else {
      preps[v] = Prep::plus_theta(sec.params.theta.at(v));
    }
  }
  for (int bin : dtg.base.inputs) {
    const int c = comp_of_base.at(bin);
    const QubitKey enc{sec.params.theta.at(c), sec.a_base.at(bin)};
    preps[c] = inputs.at(bin).transformed(enc);
  }
  return preps;
}

// ---------------------------------------------------------------------------
// Single-client VBQC over the event loop
// ---------------------------------------------------------------------------

class VbqcClient : public Cloneable<VbqcClient> {
public:
  VbqcClient() = default;
  VbqcClient(Pattern base, std::map<int, Prep> inputs,
             std::optional<TrapColouring> colouring = std::nullopt,
             std::optional<VbqcSecrets> secrets = std::nullopt,
             std::map<int, int> input_positions = {})
      : base_(std::move(base)),
        inputs_(std::move(inputs)),
        forced_colouring_(std::move(colouring)),
        forced_secrets_(std::move(secrets)),
        input_positions_(std::move(input_positions)) {}

  PartyId id() const override { return PartyId::client(0); }

  void on_start(World& w) override {
    Dtg dtg = build_dtg(base_.g);
    Rng setup = w.rng().split("vbqc-setup");
    std::map<int, int> positions = input_positions_;
    for (int v : base_.g.inputs)
      if (!positions.count(v)) positions[v] = static_cast<int>(setup.below(3));
    TrapColouring colouring = forced_colouring_
                                  ? *forced_colouring_
                                  : sample_colouring(dtg, positions, setup);
    VbqcSecrets secrets =
        forced_secrets_ ? *forced_secrets_ : VbqcSecrets::sample(dtg, colouring, setup);
    structure_ = build_vbqc_structure(base_, dtg, colouring, setup);
    secrets_ = secrets;
    secrets_.params.a_chain.clear();
    for (int v : base_.g.inputs)
      secrets_.params.a_chain[structure_.comp_of_base.at(v)] = secrets_.a_base.at(v);

    // One quantum round: every DT(G) qubit.
    const auto preps = prepare_vbqc_state(dtg, secrets_, inputs_);
    QuantumMsg msg;
    for (int v = 0; v < dtg.n; ++v) {
      const QubitId q = w.fresh_qubit(id(), v);
      vertex_qubit_[v] = q;
      msg.qubits.push_back({q, preps.at(v)});
    }
    w.send(ChannelKind::InsecureQuantum, id(), PartyId::server(), msg);
    ClassicalMsg edges{"entangle", {}};
    for (auto [a, b] : dtg.edges) {
      edges.ints.push_back(a);
      edges.ints.push_back(b);
    }
    w.send(ChannelKind::AuthClassical, id(), PartyId::server(), edges);
    next_ = 0;
    instruct(w);
  }

  void on_message(World& w, const Envelope& e) override {
    if (std::holds_alternative<QuantumMsg>(e.payload)) {
      // Output base-locations returned; measure our output traps.
      for (int v : base_.g.outputs) {
        for (int p = 0; p < 3; ++p) {
          const int dt = structure_.dtg.primary[v][p];
          if (structure_.colouring.at(dt) == VRole::Trap) {
            const AngleZ8 delta = vbqc_delta_trap(structure_, secrets_.params, dt);
            pending_client_traps_++;
            w.request_measure(id(), vertex_qubit_.at(dt), MeasBasis::rotated(delta),
                              dt, "client");
          }
        }
      }
      if (pending_client_traps_ == 0) conclude(w);
      return;
    }
    const auto& m = classical(e);
    if (m.tag != "outcome") throw std::logic_error("vbqc client: unexpected " + m.tag);
    const int dt = static_cast<int>(m.ints[0]);
    const Bit b = static_cast<Bit>(m.ints[1]);
    record_b_[dt] = b;
    if (!structure_.colouring.is_dummy(dt)) s_[dt] = b ^ secrets_.params.r.at(dt);
    ++next_;
    instruct(w);
  }

  void on_outcome(World& w, long long dt, Bit b) override {
    record_b_[static_cast<int>(dt)] = b;
    if (--pending_client_traps_ == 0) conclude(w);
  }

  bool accepted() const { return accepted_; }
  bool finished() const { return finished_; }
  const VbqcStructure& structure() const { return structure_; }
  const VbqcSecrets& secrets() const { return secrets_; }
  const std::map<int, QubitId>& vertex_qubits() const { return vertex_qubit_; }

  // Output computation qubit id and its decryption key (valid on accept).
  std::pair<QubitId, QubitKey> output(int base_out) const {
    if (!accepted_) throw std::logic_error("output withheld: run aborted");
    const int c = structure_.comp_of_base.at(base_out);
    return {vertex_qubit_.at(c), vbqc_output_key(structure_, secrets_.params, base_out, s_)};
  }

private:
  void instruct(World& w) {
    if (next_ < structure_.server_order.size()) {
      const int dt = structure_.server_order[next_];
      AngleZ8 delta;
      std::string phase = "vbqc";
      switch (structure_.colouring.at(dt)) {
        case VRole::Computation:
          delta = vbqc_delta_comp(structure_, secrets_.params, dt, s_);
          break;
        case VRole::Trap:
          delta = vbqc_delta_trap(structure_, secrets_.params, dt);
          break;
        case VRole::Dummy:
          delta = AngleZ8::random(w.rng());
          phase = "dummy";
          break;
      }
      w.send(ChannelKind::AuthClassical, id(), PartyId::server(),
             ClassicalMsg{"measure", {dt, delta.k(), 0}, phase});
    } else {
      ClassicalMsg ret{"return", {static_cast<long long>(Role::Client), 0}};
      for (int dt : structure_.returned) ret.ints.push_back(dt);
      w.send(ChannelKind::AuthClassical, id(), PartyId::server(), ret);
    }
  }

  void conclude(World& w) {
    accepted_ = true;
    for (int v = 0; v < structure_.dtg.n; ++v) {
      if (structure_.colouring.at(v) != VRole::Trap) continue;
      if (!record_b_.count(v)) continue;  // unreturned/unmeasured trap: none
      if (record_b_.at(v) != secrets_.params.r.at(v)) accepted_ = false;
    }
    finished_ = true;
    w.send(ChannelKind::AuthClassical, id(), PartyId::server(), ClassicalMsg{"halt", {}});
    halted = true;
  }

  Pattern base_;
  std::map<int, Prep> inputs_;
  std::optional<TrapColouring> forced_colouring_;
  std::optional<VbqcSecrets> forced_secrets_;
  std::map<int, int> input_positions_;

  VbqcStructure structure_;
  VbqcSecrets secrets_;
  std::map<int, QubitId> vertex_qubit_;
  std::map<int, Bit> record_b_;
  std::map<int, Bit> s_;
  std::size_t next_ = 0;
  int pending_client_traps_ = 0;
  bool accepted_ = false;
  bool finished_ = false;
};

inline World make_vbqc_world(const Pattern& base, const std::map<int, Prep>& inputs,
                             std::uint64_t seed,
                             std::shared_ptr<const ServerBehavior> behavior = nullptr,
                             std::optional<TrapColouring> colouring = std::nullopt,
                             std::optional<VbqcSecrets> secrets = std::nullopt,
                             std::map<int, int> input_positions = {},
                             int qubit_cap = 24) {
  World w(seed, qubit_cap);
  w.add_party(std::make_unique<VbqcClient>(base, inputs, std::move(colouring),
                                           std::move(secrets),
                                           std::move(input_positions)));
  w.add_party(std::make_unique<GraphServer>(std::move(behavior)));
  return w;
}

}  // namespace dmpqc
