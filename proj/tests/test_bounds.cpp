#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causalmem/bounds.hpp"
#include "causalmem/checker.hpp"
#include "causalmem/simulator.hpp"

using namespace causalmem;

namespace {

Topology pair_topology() {
  Topology t;
  t.replica_registers[1] = {"x"};
  t.replica_registers[2] = {"x"};
  return t;
}

Topology triangle() {
  Topology t;
  t.replica_registers[1] = {"a", "c"};
  t.replica_registers[2] = {"a", "b"};
  t.replica_registers[3] = {"b", "c"};
  return t;
}

}  // namespace

TEST_CASE("restricting a past keeps the source's updates on shared registers") {
  ShareGraph g = build_share_graph(triangle());
  PastSet s{{1, 1, "a"}, {1, 2, "c"}, {2, 1, "a"}, {2, 2, "b"}, {3, 1, "b"}};
  CHECK(restrict_past(s, {1, 2}, g) == PastSet{{1, 1, "a"}});
  CHECK(restrict_past(s, {1, 3}, g) == PastSet{{1, 2, "c"}});
  CHECK(restrict_past(s, {2, 3}, g) == PastSet{{2, 2, "b"}});
  CHECK(restrict_past(s, {3, 1}, g).empty());  // 3 wrote nothing on c
  CHECK(restrict_past(s, {9, 1}, g).empty());  // edge outside the graph
}

TEST_CASE("conflicts need activity on every edge in both pasts") {
  ShareGraph g = build_share_graph(pair_topology());
  PastSet empty;
  PastSet one{{1, 1, "x"}};
  PastSet two{{1, 1, "x"}, {1, 2, "x"}};
  // No update from replica 2 anywhere: the all-edges condition fails.
  CHECK_FALSE(conflicts(one, two, 2, g).has_value());
  CHECK_FALSE(conflicts(empty, one, 2, g).has_value());
}

TEST_CASE("a strict subset on an incident edge is a conflict") {
  ShareGraph g = build_share_graph(pair_topology());
  PastSet s1{{1, 1, "x"}, {2, 1, "x"}};
  PastSet s2{{1, 1, "x"}, {1, 2, "x"}, {2, 1, "x"}};
  auto w = conflicts(s1, s2, 2, g);
  REQUIRE(w.has_value());
  CHECK(w->via_incident);
  CHECK(w->edge == DirectedEdge{1, 2});
  // The relation is directional: the larger past is not a strict subset.
  CHECK_FALSE(conflicts(s2, s1, 2, g).has_value());
  // Identical pasts never conflict.
  CHECK_FALSE(conflicts(s1, s1, 2, g).has_value());
}

TEST_CASE("a strict subset on a far edge needs a witnessing cycle") {
  ShareGraph g = build_share_graph(triangle());
  PastSet common{{1, 1, "a"}, {2, 1, "a"}, {3, 1, "b"},
                 {3, 2, "c"}, {1, 2, "c"}, {2, 2, "b"}};
  PastSet s1 = common;
  PastSet s2 = common;
  s2.insert({2, 3, "b"});  // one more update on the far edge from 2 to 3
  auto w = conflicts(s1, s2, 1, g);
  REQUIRE(w.has_value());
  CHECK_FALSE(w->via_incident);
  CHECK(w->edge == DirectedEdge{2, 3});
  CHECK(w->loop == std::vector<ReplicaId>{1, 3, 2});
}

TEST_CASE("chromatic number on hand-built conflict graphs") {
  ConflictGraph h;
  CHECK(chromatic_number(h) == 0);
  h.vertices.resize(4);
  CHECK(chromatic_number(h) == 1);  // edgeless
  h.edges = {{0, 1}, {1, 2}};
  CHECK(chromatic_number(h) == 2);  // path
  h.edges = {{0, 1}, {1, 2}, {0, 2}};
  CHECK(chromatic_number(h) == 3);  // triangle plus an isolated vertex
  h.edges = {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
  CHECK(chromatic_number(h) == 4);  // K4
  CHECK_THROWS_AS(chromatic_number(h, 2), ExplosionGuard);
}

TEST_CASE("a lone replica reaches one past per write count") {
  Topology t;
  t.replica_registers[1] = {"x"};
  auto pasts = enumerate_causal_pasts(t, 1, 1);
  CHECK(pasts.size() == 2);  // nothing yet, or the single write
  auto more = enumerate_causal_pasts(t, 1, 2);
  CHECK(more.size() == 3);
}

TEST_CASE("two replicas sharing one register: m=1") {
  BoundReport r = bound_report(pair_topology(), 1, 1);
  CHECK(r.past_count == 4);
  CHECK(r.realized_timestamps == 4);
  CHECK(r.chromatic == 1);  // every conflict needs a strict subset somewhere
  CHECK(r.constraint_ok);
  CHECK(r.inequality_ok);
}

TEST_CASE("two replicas sharing one register: m=2") {
  BoundReport r = bound_report(pair_topology(), 1, 2);
  CHECK(r.past_count == 9);
  CHECK(r.realized_timestamps == 9);
  CHECK(r.chromatic == 4);
  CHECK(r.constraint_ok);
  CHECK(r.inequality_ok);
}

TEST_CASE("triangle at m=1 stays conflict-free") {
  BoundReport r = bound_report(triangle(), 1, 1);
  CHECK(r.past_count == 18);
  CHECK(r.chromatic == 1);
  CHECK(r.constraint_ok);
  CHECK(r.inequality_ok);
}

TEST_CASE("the guard rejects large instances unless overridden") {
  Topology big;
  for (int i = 1; i <= 4; ++i) big.replica_registers[i] = {"x"};
  CHECK_THROWS_AS(enumerate_causal_pasts(big, 1, 1), ExplosionGuard);
  CHECK_THROWS_AS(enumerate_causal_pasts(pair_topology(), 1, 3),
                  ExplosionGuard);
  CHECK_THROWS_AS(enumerate_causal_pasts(pair_topology(), 9, 1),
                  UnknownReplica);
  // Overriding admits the four-replica instance at m=1.
  CHECK_NOTHROW(enumerate_causal_pasts(big, 1, 1, true));
}

TEST_CASE("witness scripts replay to the enumerated past") {
  Topology t = pair_topology();
  for (const EnumeratedPast& past : enumerate_causal_pasts(t, 1, 2)) {
    Scenario s;
    s.topology = t;
    s.policy = DeliveryPolicy::script;
    s.ops = past.witness_ops;
    for (Operation& op : s.ops) op.value = "v";
    Trace trace = run_scenario(s);
    int quiesce_step = -1;
    for (const TraceEvent& ev : trace.events) {
      if (ev.kind == TraceEvent::Kind::quiesce) quiesce_step = ev.step;
    }
    REQUIRE(quiesce_step >= 0);
    HappenedBefore hb = happened_before(trace, HbVariant::peer);
    std::set<UpdateId> replayed = causal_past(trace, 1, quiesce_step - 1, hb);
    std::map<UpdateId, RegisterId> reg_of;
    for (const TraceEvent& ev : trace.events) {
      if (ev.kind == TraceEvent::Kind::issue) reg_of[ev.update] = ev.reg;
    }
    PastSet tags;
    for (UpdateId u : replayed) {
      tags.insert(UpdateTag{u.issuer, u.seq, reg_of.at(u)});
    }
    CHECK(tags == past.updates);
  }
}

TEST_CASE("bounds hold across small random topologies") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Topology t = make_random_topology(seed, 3, 4);
    ShareGraph g = build_share_graph(t);
    for (ReplicaId i : g.vertices) {
      CAPTURE(seed);
      CAPTURE(i);
      BoundReport r = bound_report(t, i, 1);
      CHECK(r.constraint_ok);
      CHECK(r.inequality_ok);
    }
  }
}
