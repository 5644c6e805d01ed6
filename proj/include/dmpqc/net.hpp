#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dmpqc/qsim.hpp"
#include "dmpqc/rng.hpp"

namespace dmpqc {

// ---------------------------------------------------------------------------
// Parties and channels
// ---------------------------------------------------------------------------

enum class Role : int { Client = 0, Server = 1, Smpc = 2 };

struct PartyId {
  Role role = Role::Client;
  int index = 0;

  friend bool operator==(const PartyId& a, const PartyId& b) {
    return a.role == b.role && a.index == b.index;
  }
  friend bool operator!=(const PartyId& a, const PartyId& b) { return !(a == b); }
  friend bool operator<(const PartyId& a, const PartyId& b) {
    return std::tie(a.role, a.index) < std::tie(b.role, b.index);
  }

  std::string str() const {
    switch (role) {
      case Role::Client: return "client" + std::to_string(index);
      case Role::Server: return "server";
      case Role::Smpc: return "smpc";
    }
    return "?";
  }

  static PartyId client(int i) { return {Role::Client, i}; }
  static PartyId server() { return {Role::Server, 0}; }
  static PartyId smpc() { return {Role::Smpc, 0}; }  // doubles as the Orchestrator
};

enum class ChannelKind : int { AuthClassical = 0, SecureClassical = 1, InsecureQuantum = 2 };

inline const char* kind_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::AuthClassical: return "auth";
    case ChannelKind::SecureClassical: return "secure";
    case ChannelKind::InsecureQuantum: return "quantum";
  }
  return "?";
}

struct ClassicalMsg {
  std::string tag;
  std::vector<long long> ints;
  std::string arg;  // free-form qualifier (e.g. measurement phase)
};

struct QuantumItem {
  QubitId id;
  std::optional<Prep> prep;  // carried for qubits not yet materialized
};

struct QuantumMsg {
  std::vector<QuantumItem> qubits;
};

using Payload = std::variant<ClassicalMsg, QuantumMsg>;

struct Envelope {
  ChannelKind kind = ChannelKind::AuthClassical;
  PartyId from, to;
  Payload payload;
};

inline const ClassicalMsg& classical(const Envelope& e) {
  return std::get<ClassicalMsg>(e.payload);
}
inline const QuantumMsg& quantum(const Envelope& e) {
  return std::get<QuantumMsg>(e.payload);
}

// ---------------------------------------------------------------------------
// Transcript
// ---------------------------------------------------------------------------

struct TranscriptEvent {
  int time = 0;
  std::string kind;  // channel kind, "measure", "eavesdrop", "rng"
  std::string from, to;
  std::string summary;  // classical content; quantum payloads by count only
};

class Transcript {
public:
  void log(std::string kind, std::string from, std::string to, std::string summary) {
    events_.push_back({static_cast<int>(events_.size()), std::move(kind),
                       std::move(from), std::move(to), std::move(summary)});
  }

  const std::vector<TranscriptEvent>& events() const { return events_; }

  std::string dump() const {
    std::ostringstream out;
    for (const auto& e : events_)
      out << e.time << "\t" << e.kind << "\t" << e.from << "\t" << e.to << "\t"
          << e.summary << "\n";
    return out.str();
  }

  std::uint64_t digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : dump()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

private:
  std::vector<TranscriptEvent> events_;
};

// ---------------------------------------------------------------------------
// Quantum fabric: the shared register with lazy materialization.
//
// Quantum messages carry preparation descriptors; a qubit becomes a live
// amplitude dimension only when first touched, and graph edges are applied
// just before a measurement consumes one endpoint. This keeps the live set
// within the register cap while quantum rounds stay batched.
// ---------------------------------------------------------------------------

class Fabric {
public:
  explicit Fabric(int cap = 24) : reg_(cap) {}

  StateRegister& reg() { return reg_; }
  const StateRegister& reg() const { return reg_; }

  void stage(const QubitId& id, const Prep& prep) {
    if (reg_.has(id) || staged_.count(id))
      throw std::invalid_argument("duplicate staged qubit " + id.str());
    staged_[id] = prep;
  }

  bool known(const QubitId& id) const { return reg_.has(id) || staged_.count(id); }

  void ensure_live(const QubitId& id) {
    auto it = staged_.find(id);
    if (it == staged_.end()) {
      if (!reg_.has(id)) throw std::invalid_argument("unknown qubit " + id.str());
      return;
    }
    reg_.alloc(id, it->second);
    staged_.erase(it);
  }

  void add_edge(const QubitId& a, const QubitId& b) { edges_.push_back({a, b, false}); }

  // Applies every not-yet-applied edge incident to q (materializing the
  // partners), so q may be measured afterwards.
  void close_edges(const QubitId& q) {
    ensure_live(q);
    for (auto& e : edges_) {
      if (e.applied) continue;
      if (e.a == q || e.b == q) {
        ensure_live(e.a);
        ensure_live(e.b);
        reg_.apply_cz(e.a, e.b);
        e.applied = true;
      }
    }
  }

  double prob_zero(const QubitId& q, const MeasBasis& basis) {
    close_edges(q);
    return reg_.prob_zero(q, basis);
  }

  Bit measure(const QubitId& q, const MeasBasis& basis, Rng& rng) {
    close_edges(q);
    return reg_.measure(q, basis, rng);
  }

  double force(const QubitId& q, const MeasBasis& basis, Bit outcome) {
    close_edges(q);
    return reg_.force(q, basis, outcome);
  }

  // Direct gate access (materializes as needed).
  void x(const QubitId& q) { ensure_live(q); reg_.apply_x(q); }
  void y(const QubitId& q) { ensure_live(q); reg_.apply_y(q); }
  void z(const QubitId& q) { ensure_live(q); reg_.apply_z(q); }
  void h(const QubitId& q) { ensure_live(q); reg_.apply_h(q); }
  void zrot(const QubitId& q, AngleZ8 t) { ensure_live(q); reg_.apply_zrot(q, t); }
  void pauli(const QubitId& q, char p) { ensure_live(q); reg_.apply_pauli(q, p); }
  void key(const QubitId& q, const QubitKey& k) { ensure_live(q); reg_.apply_key(q, k); }
  void cnot(const QubitId& c, const QubitId& t) {
    ensure_live(c);
    ensure_live(t);
    reg_.apply_cnot(c, t);
  }

private:
  struct Edge {
    QubitId a, b;
    bool applied;
  };
  StateRegister reg_;
  std::map<QubitId, Prep> staged_;
  std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// Adversary interposition points
// ---------------------------------------------------------------------------

class World;

// Channel eavesdropper per Appendix-A resource semantics. Implementations
// must be pure functions of their inputs (shared across enumeration forks).
struct ChannelTap {
  virtual ~ChannelTap() = default;
  // Authenticated classical: sees the message, may only abort delivery.
  virtual bool auth_abort(const Envelope&) const { return false; }
  // Secure classical: sees only the length, may abort delivery.
  virtual bool secure_abort(std::size_t) const { return false; }
  // Insecure quantum: may replace the payload.
  virtual std::optional<QuantumMsg> substitute(const QuantumMsg&) const { return std::nullopt; }
};

// Server-side deviation hook, the single extension point the adversary
// module uses for protocol-level attacks.
struct ServerBehavior {
  virtual ~ServerBehavior() = default;
  // Called before the server measures `q`; may tamper with held qubits.
  virtual void before_measure(Fabric&, const QubitId& q, const MeasBasis&) const {}
  // May misreport the outcome.
  virtual Bit report(const QubitId& q, Bit actual) const { (void)q; return actual; }
  // Called before output qubits are returned (or measured, classical mode).
  virtual void before_release(Fabric&, const std::vector<QubitId>& outs) const {
    (void)outs;
  }
};

// ---------------------------------------------------------------------------
// Event loop
// ---------------------------------------------------------------------------

struct MeasureRequest {
  PartyId requester;
  QubitId qubit;
  MeasBasis basis;
  long long tag = 0;       // echoed back to the requester
  std::string phase;       // "collab", "dbqc", "vbqc", "client", ...
};

using Action = std::variant<Envelope, MeasureRequest>;

class Party {
public:
  virtual ~Party() = default;
  virtual PartyId id() const = 0;
  virtual void on_start(World&) {}
  virtual void on_message(World&, const Envelope&) = 0;
  virtual void on_outcome(World&, long long tag, Bit outcome) {
    (void)tag, (void)outcome;
    throw std::logic_error("unexpected measurement outcome at " + id().str());
  }
  virtual std::unique_ptr<Party> clone() const = 0;

  bool halted = false;
};

template <class T>
class Cloneable : public Party {
public:
  std::unique_ptr<Party> clone() const override {
    return std::make_unique<T>(static_cast<const T&>(*this));
  }
};

// The whole protocol state: parties, in-flight actions, quantum fabric,
// transcript and randomness. Copyable so branch enumeration can fork it.
class World {
public:
  explicit World(std::uint64_t seed, int qubit_cap = 24)
      : fabric_(qubit_cap), rng_(seed) {}

  World(const World& o)
      : fabric_(o.fabric_),
        rng_(o.rng_),
        transcript_(o.transcript_),
        queue_(o.queue_),
        taps_(o.taps_),
        enumerate_phases_(o.enumerate_phases_),
        serial_(o.serial_),
        started_(o.started_) {
    for (const auto& p : o.parties_) parties_.push_back(p->clone());
  }
  World& operator=(const World&) = delete;

  Fabric& fabric() { return fabric_; }
  Rng& rng() { return rng_; }
  Transcript& transcript() { return transcript_; }
  const Transcript& transcript() const { return transcript_; }

  void add_party(std::unique_ptr<Party> p) { parties_.push_back(std::move(p)); }

  Party& party(PartyId id) {
    for (auto& p : parties_)
      if (p->id() == id) return *p;
    throw std::invalid_argument("unregistered endpoint " + id.str());
  }

  template <class T>
  T& party_as(PartyId id) {
    return dynamic_cast<T&>(party(id));
  }

  void add_tap(std::shared_ptr<const ChannelTap> tap) { taps_.push_back(std::move(tap)); }

  void set_enumerate_phases(std::set<std::string> phases) {
    enumerate_phases_ = std::move(phases);
  }

  QubitId fresh_qubit(PartyId owner, int tag) {
    return QubitId{static_cast<std::int32_t>(owner.role == Role::Client ? owner.index
                                                                        : -1 - static_cast<int>(owner.role)),
                   tag, serial_++};
  }

  // Channel resource semantics (Appendix A): authenticated classical leaks
  // the message and allows only abort; secure classical leaks the length;
  // insecure quantum allows substitution. All traffic is logged.
  void send(ChannelKind kind, PartyId from, PartyId to, Payload payload) {
    party(from);
    party(to);
    Envelope env{kind, from, to, std::move(payload)};
    bool abort = false;
    if (std::holds_alternative<ClassicalMsg>(env.payload)) {
      const auto& m = std::get<ClassicalMsg>(env.payload);
      for (const auto& tap : taps_) {
        if (kind == ChannelKind::AuthClassical) {
          if (tap->auth_abort(env)) abort = true;
        } else if (kind == ChannelKind::SecureClassical) {
          if (tap->secure_abort(m.ints.size())) abort = true;
        }
      }
    } else {
      if (kind != ChannelKind::InsecureQuantum)
        throw std::invalid_argument("quantum payload on classical channel");
      for (const auto& tap : taps_) {
        if (auto sub = tap->substitute(std::get<QuantumMsg>(env.payload))) {
          transcript_.log("eavesdrop", from.str(), to.str(),
                          "substitute qubits:" + std::to_string(sub->qubits.size()));
          env.payload = std::move(*sub);
        }
      }
    }
    transcript_.log(kind_name(kind), from.str(), to.str(), summarize(env.payload));
    if (abort) {
      transcript_.log("eavesdrop", from.str(), to.str(), "abort-injected");
      env.payload = ClassicalMsg{"abort", {}};
      env.kind = ChannelKind::AuthClassical;
    }
    queue_.push_back(std::move(env));
  }

  void request_measure(PartyId requester, const QubitId& q, const MeasBasis& basis,
                       long long tag, std::string phase) {
    queue_.push_back(MeasureRequest{requester, q, basis, tag, std::move(phase)});
  }

  bool queue_empty() const { return queue_.empty(); }

  // True when the front action is a measurement that enumeration must fork on.
  bool front_is_enumerable() const {
    if (queue_.empty()) return false;
    const auto* m = std::get_if<MeasureRequest>(&queue_.front());
    return m && enumerate_phases_.count(m->phase) != 0;
  }

  const MeasureRequest& front_measure() const {
    return std::get<MeasureRequest>(queue_.front());
  }

  // Resolves the front measurement with a forced outcome; returns its
  // probability. Used by the enumeration driver on forked copies.
  double resolve_front(Bit outcome) {
    MeasureRequest m = std::get<MeasureRequest>(queue_.front());
    queue_.pop_front();
    const double p = fabric_.force(m.qubit, m.basis, outcome);
    if (p == 0.0) return 0.0;
    finish_measure(m, outcome);
    return p;
  }

  void start() {
    if (started_) return;
    started_ = true;
    for (auto& p : parties_) p->on_start(*this);
  }

  // Delivers one action. Returns false when the queue is empty.
  bool step() {
    start();
    if (queue_.empty()) return false;
    Action a = std::move(queue_.front());
    queue_.pop_front();
    if (auto* env = std::get_if<Envelope>(&a)) {
      party(env->to).on_message(*this, *env);
    } else {
      auto& m = std::get<MeasureRequest>(a);
      const Bit outcome = fabric_.measure(m.qubit, m.basis, rng_);
      finish_measure(m, outcome);
    }
    return true;
  }

  void run() {
    start();
    while (step()) {
    }
    for (const auto& p : parties_)
      if (!p->halted)
        throw std::runtime_error("deadlock: no deliverable message but " +
                                 p->id().str() + " has not halted");
  }

  // Runs until the next enumerable measurement (or completion).
  void run_until_fork() {
    start();
    while (!queue_.empty() && !front_is_enumerable()) step();
  }

private:
  void finish_measure(const MeasureRequest& m, Bit outcome) {
    transcript_.log("measure", m.requester.str(), m.requester.str(),
                    m.phase + " " + m.qubit.str() + " -> " + std::to_string(outcome));
    party(m.requester).on_outcome(*this, m.tag, outcome);
  }

  static std::string summarize(const Payload& p) {
    if (const auto* c = std::get_if<ClassicalMsg>(&p)) {
      std::ostringstream out;
      out << c->tag;
      if (!c->arg.empty()) out << ":" << c->arg;
      for (long long v : c->ints) out << " " << v;
      return out.str();
    }
    const auto& q = std::get<QuantumMsg>(p);
    return "qubits:" + std::to_string(q.qubits.size());
  }

  Fabric fabric_;
  Rng rng_;
  Transcript transcript_;
  std::vector<std::unique_ptr<Party>> parties_;
  std::deque<Action> queue_;
  std::vector<std::shared_ptr<const ChannelTap>> taps_;
  std::set<std::string> enumerate_phases_;
  int serial_ = 0;
  bool started_ = false;
};

// Leaf of an exact protocol-branch enumeration.
struct WorldLeaf {
  double probability = 1.0;
  std::unique_ptr<World> world;
};

inline std::vector<WorldLeaf> run_enumerated(const World& seed_world,
                                             double cutoff = 1e-14) {
  std::vector<WorldLeaf> leaves;
  std::vector<WorldLeaf> stack;
  stack.push_back({1.0, std::make_unique<World>(seed_world)});
  while (!stack.empty()) {
    WorldLeaf cur = std::move(stack.back());
    stack.pop_back();
    cur.world->run_until_fork();
    if (!cur.world->front_is_enumerable()) {
      cur.world->run();
      leaves.push_back(std::move(cur));
      continue;
    }
    for (Bit o : {0, 1}) {
      auto forked = std::make_unique<World>(*cur.world);
      const double p = forked->resolve_front(o);
      if (cur.probability * p > cutoff)
        stack.push_back({cur.probability * p, std::move(forked)});
    }
  }
  return leaves;
}

// ---------------------------------------------------------------------------
// Transcript audits
// ---------------------------------------------------------------------------

// Number of quantum rounds for a party: maximal groups of quantum events
// involving it, uninterrupted by other events involving the same party.
inline int quantum_rounds(const Transcript& t, PartyId party) {
  const std::string name = party.str();
  int rounds = 0;
  bool in_round = false;
  for (const auto& e : t.events()) {
    if (e.from != name && e.to != name) continue;
    if (e.kind == "quantum") {
      if (!in_round) ++rounds;
      in_round = true;
    } else {
      in_round = false;
    }
  }
  return rounds;
}

}  // namespace dmpqc
