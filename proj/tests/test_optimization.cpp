#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causalmem/checker.hpp"
#include "causalmem/optimization.hpp"
#include "causalmem/simulator.hpp"

using namespace causalmem;

namespace {

// Replica 1 shares x, y, z with three singleton holders and the full set
// with replica 5: its edge to 5 is the sum of the other three.
Topology star_with_sum() {
  Topology t;
  t.replica_registers[1] = {"x", "y", "z"};
  t.replica_registers[2] = {"x"};
  t.replica_registers[3] = {"y"};
  t.replica_registers[4] = {"z"};
  t.replica_registers[5] = {"x", "y", "z"};
  return t;
}

Topology path4() {
  Topology t;
  t.replica_registers[1] = {"x"};
  t.replica_registers[2] = {"x", "y"};
  t.replica_registers[3] = {"y", "z"};
  t.replica_registers[4] = {"z"};
  return t;
}

}  // namespace

TEST_CASE("a linearly dependent outgoing edge is reconstructed exactly") {
  Topology t = star_with_sum();
  ShareGraph g = build_share_graph(t);
  CompressionPlan plan = compression_plan(g, timestamp_graph(g, 1));
  const SourcePlan& sp = plan.per_source.at(1);
  CHECK(sp.outgoing == std::vector<DirectedEdge>{{1, 2}, {1, 3}, {1, 4},
                                                 {1, 5}});
  CHECK(sp.basis == std::vector<DirectedEdge>{{1, 2}, {1, 3}, {1, 4}});
  REQUIRE(sp.reconstruction.count(DirectedEdge{1, 5}) == 1);
  auto combo = sp.reconstruction.at({1, 5});
  REQUIRE(combo.size() == 3);
  for (const auto& [edge, coeff] : combo) {
    CHECK(coeff == Rational(1));
  }
  CHECK(sp.registers == RegisterSet{"x", "y", "z"});
}

TEST_CASE("cliques compress to one counter per source") {
  Topology t;
  for (int v = 1; v <= 4; ++v) t.replica_registers[v] = {"x", "y"};
  ShareGraph g = build_share_graph(t);
  for (ReplicaId i : g.vertices) {
    CompressionPlan plan = compression_plan(g, timestamp_graph(g, i));
    CHECK(plan.full_count == 12);
    CHECK(plan.compressed_count == 4);
    for (const auto& [j, sp] : plan.per_source) {
      CAPTURE(j);
      CHECK(sp.basis.size() == 1);
      // Every dropped edge equals the basis edge (identical register sets).
      for (const auto& [e, combo] : sp.reconstruction) {
        REQUIRE(combo.size() == 1);
        CHECK(combo[0].first == sp.basis[0]);
        CHECK(combo[0].second == Rational(1));
      }
    }
  }
}

TEST_CASE("independent edges do not compress") {
  Topology t = path4();
  ShareGraph g = build_share_graph(t);
  for (ReplicaId i : g.vertices) {
    CompressionPlan plan = compression_plan(g, timestamp_graph(g, i));
    CHECK(plan.compressed_count == plan.full_count);
    for (const auto& [j, sp] : plan.per_source) {
      (void)j;
      CHECK(sp.reconstruction.empty());
    }
  }
}

TEST_CASE("register-level counts compare both schemes per source") {
  Topology t = star_with_sum();
  ShareGraph g = build_share_graph(t);
  CompressionPlan plan = compression_plan(g, timestamp_graph(g, 1));
  RegisterLevelReport report = register_level_counts(plan);
  auto [regs1, basis1] = report.per_source.at(1);
  CHECK(regs1 == 3);   // x, y, z
  CHECK(basis1 == 3);  // the three singleton edges
  CHECK(report.register_total >= report.basis_total - 0);
  int reg_sum = 0, basis_sum = 0;
  for (const auto& [j, counts] : report.per_source) {
    (void)j;
    reg_sum += counts.first;
    basis_sum += counts.second;
  }
  CHECK(reg_sum == report.register_total);
  CHECK(basis_sum == report.basis_total);
}

TEST_CASE("full-emulation dummy plans cover every missing pair") {
  Topology t = path4();
  auto plan = dummy_plan(t, DummyTarget::full_emulation);
  CHECK(plan.size() == 3 * 4 - (1 + 2 + 2 + 1));  // |V|*|X| - stored copies
  for (const auto& [i, x] : plan) {
    CHECK_FALSE(t.stores(i, x));
  }
  Topology enlarged = apply_dummies(t, plan);
  for (ReplicaId i : {1, 2, 3, 4}) {
    CHECK(enlarged.registers_of(i) == RegisterSet{"x", "y", "z"});
  }
}

TEST_CASE("selective dummy plans are empty on acyclic share graphs") {
  CHECK(dummy_plan(path4(), DummyTarget::neighbors_and_loops).empty());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CHECK(dummy_plan(make_random_tree_topology(seed, 7),
                     DummyTarget::neighbors_and_loops)
              .empty());
  }
}

TEST_CASE("selective dummy plans cover cycle-edge registers only") {
  Topology t;
  t.replica_registers[1] = {"a", "y", "w"};
  t.replica_registers[2] = {"b", "x", "y"};
  t.replica_registers[3] = {"c", "x", "z"};
  t.replica_registers[4] = {"d", "y", "z", "w"};
  auto plan = dummy_plan(t, DummyTarget::neighbors_and_loops);
  std::set<std::pair<ReplicaId, RegisterId>> expected{
      {1, "x"}, {1, "z"}, {2, "w"}, {2, "z"},
      {3, "w"}, {3, "y"}, {4, "x"}};
  CHECK(plan == expected);
  // The private registers a, b, c, d sit on no edge and are never planned.
  for (const auto& [i, x] : plan) {
    (void)i;
    CHECK(RegisterSet{"w", "x", "y", "z"}.count(x) == 1);
  }
}

TEST_CASE("dummy enlargement preserves correctness under fuzzing") {
  Topology t;
  t.replica_registers[1] = {"a", "b"};
  t.replica_registers[2] = {"b", "c"};
  t.replica_registers[3] = {"c", "d"};
  t.replica_registers[4] = {"d", "a"};  // a 4-ring
  Topology enlarged =
      apply_dummies(t, dummy_plan(t, DummyTarget::neighbors_and_loops));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Trace trace =
        run_scenario(make_fuzz_scenario(enlarged, Mode::peer, seed, 3));
    CAPTURE(seed);
    REQUIRE_FALSE(trace.stuck);
    CHECK(check_trace(trace, enlarged).pass());
  }
}

TEST_CASE("reconstructed edge counts match executed workloads") {
  Topology t = star_with_sum();
  ShareGraph g = build_share_graph(t);
  std::map<ReplicaId, CompressionPlan> plans;
  for (ReplicaId i : g.vertices) {
    plans.emplace(i, compression_plan(g, timestamp_graph(g, i)));
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Trace trace = run_scenario(make_fuzz_scenario(t, Mode::peer, seed, 4));
    REQUIRE_FALSE(trace.stuck);
    auto counts = edge_update_counts(trace, g);
    for (const auto& [i, plan] : plans) {
      (void)i;
      for (const auto& [j, sp] : plan.per_source) {
        (void)j;
        for (const auto& [e, combo] : sp.reconstruction) {
          Rational rebuilt(0);
          for (const auto& [b, coeff] : combo) {
            rebuilt += coeff * Rational(counts.at(b));
          }
          CAPTURE(seed);
          CHECK(rebuilt == Rational(counts.at(e)));
        }
      }
    }
  }
}
