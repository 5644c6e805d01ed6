#pragma once

#include <map>
#include <memory>
#include <vector>

#include "dmpqc/mbqc.hpp"
#include "dmpqc/net.hpp"

namespace dmpqc {

// ---------------------------------------------------------------------------
// Generic instruction-driven server. The same machine serves UBQC, DBQC and
// the full protocol: it holds qubits (tagged with their graph vertex), adds
// entangling edges, measures on instruction, performs collaborative
// encryption steps, and returns or measures output qubits. All deviations
// route through the ServerBehavior hook.
//
// Instructions (classical, from the driving party):
//   entangle  ints = [a1 b1 a2 b2 ...]          vertex pairs
//   measure   ints = [vertex, delta_k, tag]     arg = phase
//   collab    ints = [owner_vertex, target...]  CNOT + computational readout
//   return    ints = [role, index, vertex...]   send qubits to a party
//   halt
// ---------------------------------------------------------------------------

class GraphServer : public Cloneable<GraphServer> {
public:
  explicit GraphServer(std::shared_ptr<const ServerBehavior> behavior = nullptr)
      : behavior_(std::move(behavior)) {}

  PartyId id() const override { return PartyId::server(); }

  void on_message(World& w, const Envelope& e) override {
    if (std::holds_alternative<QuantumMsg>(e.payload)) {
      for (const auto& item : quantum(e).qubits) {
        if (item.prep)
          w.fabric().stage(item.id, *item.prep);
        held_[item.id.tag] = item.id;
      }
      return;
    }
    const auto& m = classical(e);
    if (m.tag == "entangle") {
      for (std::size_t i = 0; i + 1 < m.ints.size(); i += 2)
        w.fabric().add_edge(vertex_qubit(static_cast<int>(m.ints[i])),
                            vertex_qubit(static_cast<int>(m.ints[i + 1])));
    } else if (m.tag == "measure") {
      const int vertex = static_cast<int>(m.ints[0]);
      const AngleZ8 delta(static_cast<int>(m.ints[1]));
      const long long tag = m.ints[2];
      const QubitId q = vertex_qubit(vertex);
      const MeasBasis basis = MeasBasis::rotated(delta);
      if (behavior_) {
        w.fabric().close_edges(q);
        behavior_->before_measure(w.fabric(), q, basis);
      }
      pending_[next_req_] = {vertex, tag, e.from, q};
      w.request_measure(id(), q, basis, next_req_, m.arg);
      ++next_req_;
    } else if (m.tag == "collab") {
      run_collab(w, e.from, m);
    } else if (m.tag == "return") {
      const PartyId to{static_cast<Role>(m.ints[0]), static_cast<int>(m.ints[1])};
      QuantumMsg out;
      std::vector<QubitId> ids;
      for (std::size_t i = 2; i < m.ints.size(); ++i)
        ids.push_back(vertex_qubit(static_cast<int>(m.ints[i])));
      if (behavior_) {
        for (const QubitId& q : ids) w.fabric().ensure_live(q);
        behavior_->before_release(w.fabric(), ids);
      }
      for (const QubitId& q : ids) {
        w.fabric().ensure_live(q);
        out.qubits.push_back({q, std::nullopt});
      }
      w.send(ChannelKind::InsecureQuantum, id(), to, out);
    } else if (m.tag == "halt") {
      halted = true;
    } else if (m.tag == "abort") {
      halted = true;
    } else {
      throw std::logic_error("server: unknown instruction " + m.tag);
    }
  }

  void on_outcome(World& w, long long req, Bit outcome) override {
    if (collab_.count(req)) {
      collab_finish(w, req, outcome);
      return;
    }
    const Pending p = pending_.at(req);
    pending_.erase(req);
    Bit reported = outcome;
    if (behavior_) reported = behavior_->report(p.qubit, outcome);
    w.send(ChannelKind::AuthClassical, id(), p.driver,
           ClassicalMsg{"outcome", {p.vertex, reported, p.tag}});
  }

private:
  struct Pending {
    int vertex = 0;
    long long tag = 0;
    PartyId driver;
    QubitId qubit;
  };

  struct CollabState {
    int owner_vertex = 0;
    PartyId driver;
    std::vector<int> targets;   // remaining target vertices
    std::vector<long long> t;   // outcomes gathered so far
  };

  QubitId vertex_qubit(int vertex) const {
    auto it = held_.find(vertex);
    if (it == held_.end())
      throw std::logic_error("server holds no qubit for vertex " +
                             std::to_string(vertex));
    return it->second;
  }

  // CNOT(owner -> target), computational readout of each target in turn.
  void run_collab(World& w, PartyId driver, const ClassicalMsg& m) {
    CollabState st;
    st.owner_vertex = static_cast<int>(m.ints[0]);
    st.driver = driver;
    for (std::size_t i = 1; i < m.ints.size(); ++i)
      st.targets.push_back(static_cast<int>(m.ints[i]));
    collab_[next_req_] = std::move(st);
    collab_step(w, next_req_);
    ++next_req_;
  }

  void collab_step(World& w, long long req) {
    auto& st = collab_.at(req);
    if (st.targets.empty()) {
      ClassicalMsg done{"collab-t", {st.owner_vertex}};
      for (long long t : st.t) done.ints.push_back(t);
      // t(i) is broadcast in the clear (public per the protocol).
      w.send(ChannelKind::AuthClassical, id(), st.driver, done);
      collab_.erase(req);
      return;
    }
    const int tgt = st.targets.front();
    st.targets.erase(st.targets.begin());
    const QubitId owner = vertex_qubit(st.owner_vertex);
    const QubitId target = vertex_qubit(tgt);
    w.fabric().cnot(owner, target);
    w.request_measure(id(), target, MeasBasis::comp(), req, "collab");
  }

  void collab_finish(World& w, long long req, Bit outcome) {
    collab_.at(req).t.push_back(outcome);
    collab_step(w, req);
  }

  std::map<int, QubitId> held_;  // graph vertex -> qubitid
  std::map<long long, Pending> pending_;
  std::map<long long, CollabState> collab_;
  long long next_req_ = 0;
  std::shared_ptr<const ServerBehavior> behavior_;
};

// ---------------------------------------------------------------------------
// UBQC client
// ---------------------------------------------------------------------------

struct UbqcSecrets {
  std::map<int, AngleZ8> theta;  // on O^c
  std::map<int, Bit> r;          // on O^c
  std::map<int, Bit> a;          // on I

  static UbqcSecrets sample(const Pattern& p, Rng& rng) {
    UbqcSecrets s;
    for (int v : p.g.measured()) {
      s.theta[v] = AngleZ8::random(rng);
      s.r[v] = rng.bit();
    }
    for (int v : p.g.inputs) s.a[v] = rng.bit();
    return s;
  }

  Bit a_of(int v) const {
    auto it = a.find(v);
    return it == a.end() ? 0 : it->second;
  }
};

// The X^{a(j)} pad on an input qubit j commutes through the entangling CZs
// as Z^{a(j)} on every neighbour of j, so each neighbour's angle absorbs
// a(j) pi. For inputs of degree 1 this reduces to the usual a(f^{-1}(i)).
inline Bit input_pad_parity(int v, const Pattern& pattern, const UbqcSecrets& secrets) {
  Bit acc = 0;
  for (int j : pattern.g.neighbours(v))
    if (pattern.g.is_input(j)) acc ^= secrets.a_of(j);
  return acc;
}

// delta(i) = (-1)^{s'_X} phi(i) + pi s'_Z + theta(i) + pi r(i), with
// s'_X = a(i) xor s_X(i) and s'_Z = (input-pad parity) xor s_Z(i).
inline AngleZ8 ubqc_delta(int v, const Pattern& pattern, const DependencySets& deps,
                          const UbqcSecrets& secrets, const std::map<int, Bit>& s) {
  for (int j : deps.x.at(v))
    if (!s.count(j)) throw std::logic_error("unmeasured X dependency");
  for (int j : deps.z.at(v))
    if (!s.count(j)) throw std::logic_error("unmeasured Z dependency");
  const Bit sx = detail::xor_over(deps.x.at(v), s);
  const Bit sz = detail::xor_over(deps.z.at(v), s);
  const Bit sx_adapted = secrets.a_of(v) ^ sx;
  const Bit sz_adapted = input_pad_parity(v, pattern, secrets) ^ sz;
  return corrected_angle(pattern.phi.at(v), sx_adapted, sz_adapted) +
         secrets.theta.at(v) + (secrets.r.at(v) ? kPi : AngleZ8(0));
}

class UbqcClient : public Cloneable<UbqcClient> {
public:
  UbqcClient() = default;
  UbqcClient(Pattern pattern, std::map<int, Prep> inputs, UbqcSecrets secrets)
      : pattern_(std::move(pattern)),
        inputs_(std::move(inputs)),
        secrets_(std::move(secrets)) {
    deps_ = dependency_sets(pattern_);
  }

  PartyId id() const override { return PartyId::client(0); }

  void on_start(World& w) override {
    // One quantum round: encrypted inputs, rotated |+_theta> for the other
    // measured vertices, raw |+> for outputs.
    QuantumMsg msg;
    ClassicalMsg edges{"entangle", {}};
    for (auto [a, b] : pattern_.g.edges) {
      edges.ints.push_back(a);
      edges.ints.push_back(b);
    }
    for (int v = 0; v < pattern_.g.n; ++v) {
      const QubitId q = w.fresh_qubit(id(), v);
      vertex_qubit_[v] = q;
      Prep prep = Prep::plus();
      if (pattern_.g.is_input(v)) {
        const QubitKey enc{secrets_.theta.at(v), secrets_.a.at(v)};
        prep = inputs_.at(v).transformed(enc);
      } else if (!pattern_.g.is_output(v)) {
        prep = Prep::plus_theta(secrets_.theta.at(v));
      }
      msg.qubits.push_back({q, prep});
    }
    w.send(ChannelKind::InsecureQuantum, id(), PartyId::server(), msg);
    w.send(ChannelKind::AuthClassical, id(), PartyId::server(), edges);
    next_ = 0;
    instruct(w);
  }

  void on_message(World& w, const Envelope& e) override {
    if (std::holds_alternative<QuantumMsg>(e.payload)) {
      // Output qubits returned; compute the final corrections.
      for (int v : pattern_.g.outputs) {
        const Bit sx = detail::xor_over(deps_.x.at(v), s_);
        const Bit sz = detail::xor_over(deps_.z.at(v), s_);
        const Bit sxp = secrets_.a_of(v) ^ sx;
        const Bit szp = input_pad_parity(v, pattern_, secrets_) ^ sz;
        output_key_[v] = QubitKey{szp ? kPi : AngleZ8(0), sxp};
      }
      w.send(ChannelKind::AuthClassical, id(), PartyId::server(), ClassicalMsg{"halt", {}});
      halted = true;
      return;
    }
    const auto& m = classical(e);
    if (m.tag != "outcome") throw std::logic_error("ubqc client: unexpected " + m.tag);
    const int vertex = static_cast<int>(m.ints[0]);
    const Bit b = static_cast<Bit>(m.ints[1]);
    record_b_[vertex] = b;
    s_[vertex] = b ^ secrets_.r.at(vertex);
    ++next_;
    instruct(w);
  }

  const std::map<int, QubitKey>& output_keys() const { return output_key_; }
  const std::map<int, QubitId>& vertex_qubits() const { return vertex_qubit_; }
  const std::map<int, AngleZ8>& deltas_sent() const { return record_delta_; }
  const std::map<int, Bit>& outcomes() const { return record_b_; }
  const std::map<int, Bit>& corrected_outcomes() const { return s_; }

private:
  void instruct(World& w) {
    if (next_ < pattern_.flow.order.size()) {
      const int v = pattern_.flow.order[next_];
      const AngleZ8 delta = ubqc_delta(v, pattern_, deps_, secrets_, s_);
      record_delta_[v] = delta;
      w.send(ChannelKind::AuthClassical, id(), PartyId::server(),
             ClassicalMsg{"measure", {v, delta.k(), 0}, "ubqc"});
    } else {
      ClassicalMsg ret{"return", {static_cast<long long>(Role::Client), 0}};
      for (int v : pattern_.g.outputs) ret.ints.push_back(v);
      w.send(ChannelKind::AuthClassical, id(), PartyId::server(), ret);
    }
  }

  Pattern pattern_;
  std::map<int, Prep> inputs_;
  UbqcSecrets secrets_;
  DependencySets deps_;
  std::map<int, QubitId> vertex_qubit_;
  std::map<int, AngleZ8> record_delta_;
  std::map<int, Bit> record_b_;
  std::map<int, Bit> s_;
  std::map<int, QubitKey> output_key_;
  std::size_t next_ = 0;
};

struct UbqcRun {
  World world;
  bool ok = false;
};

// Builds and runs a single-client UBQC world. The returned world's client
// party exposes output keys and qubit ids for decryption by the caller.
inline World make_ubqc_world(const Pattern& pattern, const std::map<int, Prep>& inputs,
                             std::uint64_t seed,
                             std::shared_ptr<const ServerBehavior> behavior = nullptr,
                             int qubit_cap = 24) {
  World w(seed, qubit_cap);
  Rng secrets_rng = Rng(seed).split("ubqc-secrets");
  w.add_party(std::make_unique<UbqcClient>(pattern, inputs,
                                           UbqcSecrets::sample(pattern, secrets_rng)));
  w.add_party(std::make_unique<GraphServer>(std::move(behavior)));
  return w;
}

// Decrypted output register of a finished UBQC world (test helper).
inline StateRegister ubqc_decrypt(World& w) {
  auto& client = w.party_as<UbqcClient>(PartyId::client(0));
  StateRegister reg = w.fabric().reg();
  for (const auto& [v, key] : client.output_keys())
    reg.apply_key(client.vertex_qubits().at(v), key.inverse());
  return reg;
}

}  // namespace dmpqc
