#pragma once

#include <optional>
#include <set>
#include <vector>

#include "causalmem/simulator.hpp"

namespace causalmem {

struct ExplosionGuard : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Update identity stable across executions: issuer, per-issuer sequence,
/// and the register the update targets.
struct UpdateTag {
  ReplicaId issuer = 0;
  std::int64_t seq = 0;
  RegisterId reg;
  auto operator<=>(const UpdateTag&) const = default;
};

using PastSet = std::set<UpdateTag>;

/// S restricted to edge e: updates issued by e.from on registers shared
/// across e. Empty for edges outside the graph.
PastSet restrict_past(const PastSet& s, DirectedEdge e, const ShareGraph& graph);

struct ConflictWitness {
  DirectedEdge edge;
  bool via_incident = false;
  std::vector<ReplicaId> loop;  // i, l_1..l_s, r_1..r_t when not incident
};

/// Conflict test for two causal pasts of replica i: every edge carries
/// updates in both pasts, and some edge's updates in s1 form a strict subset
/// of s2's — with that edge either incident to i or witnessed by a simple
/// loop through i meeting the equality and non-emptiness side conditions.
std::optional<ConflictWitness> conflicts(const PastSet& s1, const PastSet& s2,
                                         ReplicaId i, const ShareGraph& graph);

/// One reachable causal past of the observed replica, with the timestamps
/// realized for it and a script scenario reproducing it.
struct EnumeratedPast {
  PastSet updates;
  std::set<EdgeTimestamp> taus;
  std::vector<Operation> witness_ops;
};

/// All causal pasts of replica i over protocol executions where each replica
/// issues at most m updates (any register choice), by exhaustive memoized
/// search. Guarded to <= 3 replicas and m <= 2 unless overridden.
std::vector<EnumeratedPast> enumerate_causal_pasts(const Topology& topology,
                                                   ReplicaId i, int m,
                                                   bool override_guard = false);

struct ConflictGraph {
  std::vector<PastSet> vertices;
  std::set<std::pair<int, int>> edges;  // indices, first < second
};

/// Symmetric closure of the conflict predicate over the enumerated pasts.
ConflictGraph build_conflict_graph(const std::vector<EnumeratedPast>& pasts,
                                   ReplicaId i, const ShareGraph& graph);

/// Exact chromatic number by branch-and-bound; guarded vertex cap.
int chromatic_number(const ConflictGraph& h, int vertex_cap = 64);

struct BoundReport {
  ReplicaId replica = 0;
  int m = 0;
  int past_count = 0;
  int chromatic = 0;
  int realized_timestamps = 0;
  bool constraint_ok = true;   // equal pasts always carried equal timestamps
  bool inequality_ok = true;   // chromatic <= realized_timestamps
};

/// Compares the coloring lower bound against the number of distinct
/// timestamps the protocol actually uses over the same execution space.
BoundReport bound_report(const Topology& topology, ReplicaId i, int m,
                         bool override_guard = false);

}  // namespace causalmem
