#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causalmem/client_server.hpp"
#include "causalmem/simulator.hpp"

using namespace causalmem;

namespace {

// 1-2-3-4 path closed by a client on {1, 4}.
Topology path_with_client() {
  Topology t;
  t.replica_registers[1] = {"x"};
  t.replica_registers[2] = {"x", "y"};
  t.replica_registers[3] = {"y", "z"};
  t.replica_registers[4] = {"z"};
  t.client_replicas[7] = {1, 4};
  return t;
}

struct Fixture {
  Topology topology;
  AugmentedShareGraph ag;
  std::map<ReplicaId, TimestampGraph> tsgs;
  std::map<ReplicaId, ReplicaState> replicas;

  explicit Fixture(const Topology& t)
      : topology(t), ag(build_augmented_share_graph(t)) {
    for (ReplicaId i : ag.base.vertices) {
      tsgs.emplace(i, augmented_timestamp_graph(ag, topology, i));
      replicas.emplace(i, make_replica(topology, tsgs.at(i), i));
    }
  }
};

}  // namespace

TEST_CASE("client timestamps span the tracked edges of their replicas") {
  Fixture f(path_with_client());
  ClientState c = make_client(f.topology, f.tsgs, 7);
  CHECK(c.replicas == std::set<ReplicaId>{1, 4});
  std::set<DirectedEdge> expected;
  for (ReplicaId r : {1, 4}) {
    expected.insert(f.tsgs.at(r).edges.begin(), f.tsgs.at(r).edges.end());
  }
  std::set<DirectedEdge> got;
  for (const auto& [e, count] : c.mu.counters) {
    got.insert(e);
    CHECK(count == 0);
  }
  CHECK(got == expected);
  CHECK_THROWS_AS(make_client(f.topology, f.tsgs, 9), NotAccessible);
}

TEST_CASE("service predicate compares only the replica's incoming edges") {
  Fixture f(path_with_client());
  ClientState c = make_client(f.topology, f.tsgs, 7);
  CHECK(predicate_j1_j2(f.replicas.at(1).tau, 1, c.mu));

  // Client has observed one update on the edge into replica 1.
  c.mu.counters[{2, 1}] = 1;
  CHECK_FALSE(predicate_j1_j2(f.replicas.at(1).tau, 1, c.mu));
  // Outgoing counters carried by the client never block service.
  c.mu.counters[{2, 1}] = 0;
  c.mu.counters[{1, 2}] = 5;
  CHECK(predicate_j1_j2(f.replicas.at(1).tau, 1, c.mu));
}

TEST_CASE("serving advance folds the client's counters into the stamp") {
  Fixture f(path_with_client());
  ClientState c = make_client(f.topology, f.tsgs, 7);
  c.mu.counters[{3, 4}] = 2;  // carried in from a past access to replica 4?
  // No: {3,4} is incoming at 4. Give the client knowledge on an edge that
  // replica 1 tracks but does not advance for x.
  c.mu.counters[{2, 1}] = 0;
  f.replicas.at(1).tau.counters[{2, 1}] = 0;

  EdgeTimestamp stamp = cs_advance(f.replicas.at(1), f.ag.base, c.mu, "x");
  CHECK(stamp.at({1, 2}) == 1);  // outgoing edge sharing x advances
  CHECK(stamp.at({2, 1}) == 0);

  // When the client carries a higher dependency counter, the stamp adopts it.
  c.mu.counters[{2, 1}] = 3;
  EdgeTimestamp stamp2 = cs_advance(f.replicas.at(1), f.ag.base, c.mu, "x");
  CHECK(stamp2.at({2, 1}) == 3);
  CHECK(stamp2.at({1, 2}) == 1);
  CHECK_THROWS_AS(cs_advance(f.replicas.at(1), f.ag.base, c.mu, "z"),
                  NotStored);
}

TEST_CASE("client merge folds a served replica's tau into mu") {
  Fixture f(path_with_client());
  ClientState c = make_client(f.topology, f.tsgs, 7);
  f.replicas.at(1).tau.counters[{1, 2}] = 4;
  EdgeTimestamp merged = client_merge(c, 1, f.replicas.at(1).tau);
  CHECK(merged.at({1, 2}) == 4);
  CHECK_THROWS_AS(client_merge(c, 2, f.replicas.at(2).tau), NotAccessible);
}

TEST_CASE("serving replica selection respects access and real copies") {
  Topology t = path_with_client();
  t.replica_registers[4].insert("y");
  t.dummy_marks.insert({4, "y"});
  Fixture f(t);
  ClientState c = make_client(f.topology, f.tsgs, 7);
  CHECK(select_serving_replica(f.topology, c, "x") == 1);
  CHECK(select_serving_replica(f.topology, c, "z") == 4);
  CHECK(select_serving_replica(f.topology, c, "z", 4) == 4);
  // y at replica 4 is a dummy copy and replica 2 is not accessible.
  CHECK_THROWS_AS(select_serving_replica(f.topology, c, "y"), NotAccessible);
  CHECK_THROWS_AS(select_serving_replica(f.topology, c, "y", 4),
                  NotAccessible);
  CHECK_THROWS_AS(select_serving_replica(f.topology, c, "x", 2),
                  NotAccessible);
}

TEST_CASE("clients with one replica behave like direct peer access") {
  // With a single accessible replica the client's mu never exceeds that
  // replica's tau, so the serving stamp equals the plain peer advance.
  Topology t;
  t.replica_registers[1] = {"x"};
  t.replica_registers[2] = {"x", "y"};
  t.replica_registers[3] = {"y"};
  t.client_replicas[5] = {2};
  Fixture f(t);
  ClientState c = make_client(f.topology, f.tsgs, 5);

  for (int round = 0; round < 3; ++round) {
    CHECK(predicate_j1_j2(f.replicas.at(2).tau, 2, c.mu));
    EdgeTimestamp cs = cs_advance(f.replicas.at(2), f.ag.base, c.mu, "y");
    EdgeTimestamp peer = advance(f.replicas.at(2), f.ag.base, "y");
    CHECK(cs == peer);
    WriteResult wr = handle_write(f.replicas.at(2), f.topology, f.ag.base,
                                  "y", "v" + std::to_string(round));
    CHECK(wr.stamp == cs);
    c.mu = client_merge(c, 2, f.replicas.at(2).tau);
  }
}

TEST_CASE("a client round trip carries dependencies across replicas") {
  // The client writes x at replica 1, then z at replica 4; the second stamp
  // must dominate the first on every shared tracked edge, which is how the
  // session's order reaches replicas the first update never visited.
  Fixture f(path_with_client());
  ClientState c = make_client(f.topology, f.tsgs, 7);

  REQUIRE(predicate_j1_j2(f.replicas.at(1).tau, 1, c.mu));
  EdgeTimestamp s1 = cs_advance(f.replicas.at(1), f.ag.base, c.mu, "x");
  f.replicas.at(1).tau = s1;
  c.mu = client_merge(c, 1, f.replicas.at(1).tau);
  CHECK(c.mu.at({1, 2}) == 1);

  REQUIRE(predicate_j1_j2(f.replicas.at(4).tau, 4, c.mu));
  EdgeTimestamp s2 = cs_advance(f.replicas.at(4), f.ag.base, c.mu, "z");
  for (const auto& [e, count] : s1.counters) {
    if (s2.has(e)) CHECK(s2.at(e) >= count);
  }
  CHECK(s2.at({4, 3}) == 1);
  CHECK(s2.at({1, 2}) == 1);  // dependency travelled through the client
}
