#include <catch2/catch_amalgamated.hpp>

#include "dmpqc/net.hpp"

using namespace dmpqc;

namespace {

// Minimal ping/pong pair used to exercise the scheduler.
class Pinger : public Cloneable<Pinger> {
public:
  PartyId id() const override { return PartyId::client(0); }
  void on_start(World& w) override {
    w.send(ChannelKind::AuthClassical, id(), PartyId::server(), ClassicalMsg{"ping", {0}});
  }
  void on_message(World& w, const Envelope& e) override {
    const auto& m = classical(e);
    if (m.tag == "pong" && m.ints[0] < 2) {
      w.send(ChannelKind::AuthClassical, id(), PartyId::server(),
             ClassicalMsg{"ping", {m.ints[0] + 1}});
    } else {
      w.send(ChannelKind::AuthClassical, id(), PartyId::server(), ClassicalMsg{"halt", {}});
      halted = true;
    }
  }
};

class Ponger : public Cloneable<Ponger> {
public:
  PartyId id() const override { return PartyId::server(); }
  void on_message(World& w, const Envelope& e) override {
    const auto& m = classical(e);
    if (m.tag == "ping")
      w.send(ChannelKind::AuthClassical, id(), PartyId::client(0),
             ClassicalMsg{"pong", {m.ints[0]}});
    else
      halted = true;
  }
};

class MeasuringParty : public Cloneable<MeasuringParty> {
public:
  PartyId id() const override { return PartyId::client(0); }
  void on_start(World& w) override {
    q = w.fresh_qubit(id(), 0);
    w.fabric().stage(q, Prep::plus());
    w.request_measure(id(), q, MeasBasis::comp(), 7, "test");
  }
  void on_message(World&, const Envelope&) override {}
  void on_outcome(World&, long long tag, Bit o) override {
    got_tag = tag;
    outcome = o;
    halted = true;
  }
  QubitId q;
  long long got_tag = -1;
  Bit outcome = -1;
};

World make_pingpong(std::uint64_t seed) {
  World w(seed);
  w.add_party(std::make_unique<Pinger>());
  w.add_party(std::make_unique<Ponger>());
  return w;
}

}  // namespace

TEST_CASE("ping pong produces a fixed transcript") {
  World w = make_pingpong(1);
  w.run();
  // 3 pings + 3 pongs + halt = 7 messages
  int messages = 0;
  for (const auto& e : w.transcript().events())
    if (e.kind == "auth") ++messages;
  CHECK(messages == 7);
}

TEST_CASE("replay with the same seed gives byte-identical digests") {
  World a = make_pingpong(42), b = make_pingpong(42);
  a.run();
  b.run();
  CHECK(a.transcript().digest() == b.transcript().digest());
}

TEST_CASE("unregistered endpoint is rejected") {
  World w(1);
  w.add_party(std::make_unique<Pinger>());
  CHECK_THROWS(w.send(ChannelKind::AuthClassical, PartyId::client(0), PartyId::server(),
                      ClassicalMsg{"x", {}}));
}

TEST_CASE("deadlock is detected") {
  World w(1);
  w.add_party(std::make_unique<Ponger>());  // waits forever, never halts
  CHECK_THROWS_WITH(w.run(), Catch::Matchers::ContainsSubstring("deadlock"));
}

TEST_CASE("measurement requests round-trip through the loop") {
  World w(5);
  w.add_party(std::make_unique<MeasuringParty>());
  w.run();
  auto& p = w.party_as<MeasuringParty>(PartyId::client(0));
  CHECK(p.got_tag == 7);
  CHECK((p.outcome == 0 || p.outcome == 1));
  bool measured_logged = false;
  for (const auto& e : w.transcript().events())
    if (e.kind == "measure") measured_logged = true;
  CHECK(measured_logged);
}

TEST_CASE("enumeration forks on enumerable measurements") {
  World w(5);
  w.add_party(std::make_unique<MeasuringParty>());
  w.set_enumerate_phases({"test"});
  auto leaves = run_enumerated(w);
  REQUIRE(leaves.size() == 2);
  CHECK(std::abs(leaves[0].probability - 0.5) < 1e-12);
  CHECK(std::abs(leaves[1].probability - 0.5) < 1e-12);
}

namespace {

struct AbortingTap : ChannelTap {
  bool auth_abort(const Envelope& e) const override {
    return classical(e).tag == "ping" && classical(e).ints[0] == 1;
  }
};

struct LengthTap : ChannelTap {
  // Only the length is visible on secure channels; abort on 3-int payloads.
  bool secure_abort(std::size_t n) const override { return n == 3; }
};

struct SubstitutingTap : ChannelTap {
  std::optional<QuantumMsg> substitute(const QuantumMsg& m) const override {
    QuantumMsg sub;
    for (const auto& item : m.qubits) sub.qubits.push_back({item.id, Prep::zero()});
    return sub;
  }
};

class SecureSender : public Cloneable<SecureSender> {
public:
  PartyId id() const override { return PartyId::client(0); }
  void on_start(World& w) override {
    w.send(ChannelKind::SecureClassical, id(), PartyId::server(),
           ClassicalMsg{"secret", {1, 2, 3}});
    halted = true;
  }
  void on_message(World&, const Envelope&) override {}
};

class RecordingReceiver : public Cloneable<RecordingReceiver> {
public:
  PartyId id() const override { return PartyId::server(); }
  void on_message(World&, const Envelope& e) override {
    last_tag = classical(e).tag;
    halted = true;
  }
  std::string last_tag;
};

class QuantumSender : public Cloneable<QuantumSender> {
public:
  PartyId id() const override { return PartyId::client(0); }
  void on_start(World& w) override {
    QuantumMsg m;
    m.qubits.push_back({w.fresh_qubit(id(), 0), Prep::one()});
    w.send(ChannelKind::InsecureQuantum, id(), PartyId::server(), m);
    halted = true;
  }
  void on_message(World&, const Envelope&) override {}
};

class QuantumReceiver : public Cloneable<QuantumReceiver> {
public:
  PartyId id() const override { return PartyId::server(); }
  void on_message(World& w, const Envelope& e) override {
    for (const auto& item : quantum(e).qubits) {
      w.fabric().stage(item.id, *item.prep);
      w.request_measure(id(), item.id, MeasBasis::comp(), 0, "recv");
    }
  }
  void on_outcome(World&, long long, Bit o) override {
    outcome = o;
    halted = true;
  }
  Bit outcome = -1;
};

}  // namespace

TEST_CASE("authenticated channel tap can abort delivery") {
  World w = make_pingpong(1);
  w.add_tap(std::make_shared<AbortingTap>());
  // The receiver gets "abort" instead of the second ping; Ponger treats any
  // non-ping as a halt signal, Pinger never hears back and would deadlock,
  // so we just drain the queue without the halt check.
  while (w.step()) {
  }
  bool abort_seen = false;
  for (const auto& e : w.transcript().events())
    if (e.summary == "abort-injected") abort_seen = true;
  CHECK(abort_seen);
}

TEST_CASE("secure channel tap sees only the length") {
  World w(1);
  w.add_party(std::make_unique<SecureSender>());
  w.add_party(std::make_unique<RecordingReceiver>());
  w.add_tap(std::make_shared<LengthTap>());
  while (w.step()) {
  }
  auto& r = w.party_as<RecordingReceiver>(PartyId::server());
  CHECK(r.last_tag == "abort");  // length 3 triggered the abort
}

TEST_CASE("insecure quantum channel tap substitutes the payload") {
  World w(9);
  w.add_party(std::make_unique<QuantumSender>());
  w.add_party(std::make_unique<QuantumReceiver>());
  w.add_tap(std::make_shared<SubstitutingTap>());
  w.run();
  // |1> was replaced by |0>, so the computational readout is 0.
  CHECK(w.party_as<QuantumReceiver>(PartyId::server()).outcome == 0);
}

TEST_CASE("fabric applies pending edges before measurement") {
  World w(3);
  Fabric& f = w.fabric();
  QubitId a{0, 0, 0}, b{0, 1, 1};
  f.stage(a, Prep::plus());
  f.stage(b, Prep::one());
  f.add_edge(a, b);
  // CZ |+>|1> = |-> (x) |1>, so the X-basis readout of qubit a is 1.
  const double p0 = f.prob_zero(a, MeasBasis::rotated(AngleZ8(0)));
  CHECK(std::abs(p0) < 1e-12);
  CHECK(f.reg().num_qubits() == 2);  // both materialized by edge closure
}
