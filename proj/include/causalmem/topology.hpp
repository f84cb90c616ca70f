#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace causalmem {

using ReplicaId = int;
using ClientId = int;
using RegisterId = std::string;
using RegisterSet = std::set<RegisterId>;

/// Directed edge between two replicas in a share graph.
struct DirectedEdge {
  ReplicaId from = 0;
  ReplicaId to = 0;
  auto operator<=>(const DirectedEdge&) const = default;
};

struct InvalidTopology : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DummyConflict : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownReplica : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownRegister : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Register placement: which replica stores which registers (X_i), which
/// client may access which replicas (R_c), and which copies are dummies.
struct Topology {
  std::map<ReplicaId, RegisterSet> replica_registers;
  std::map<ClientId, std::set<ReplicaId>> client_replicas;
  std::set<std::pair<ReplicaId, RegisterId>> dummy_marks;

  void validate() const;

  bool has_replica(ReplicaId i) const { return replica_registers.count(i) != 0; }
  const RegisterSet& registers_of(ReplicaId i) const;
  bool stores(ReplicaId i, const RegisterId& x) const;
  bool is_dummy(ReplicaId i, const RegisterId& x) const {
    return dummy_marks.count({i, x}) != 0;
  }
  /// X_i minus dummy copies: the registers clients may actually operate on.
  RegisterSet real_registers_of(ReplicaId i) const;
  /// All registers stored anywhere.
  RegisterSet all_registers() const;
  /// Replicas storing x (including dummy copies), ascending.
  std::vector<ReplicaId> holders(const RegisterId& x) const;
};

/// Share graph G = (V, E): directed edges e_ij and e_ji whenever X_i and X_j
/// intersect, labelled with that intersection.
struct ShareGraph {
  std::set<ReplicaId> vertices;
  std::set<DirectedEdge> edges;
  std::map<DirectedEdge, RegisterSet> edge_registers;

  bool has_edge(ReplicaId i, ReplicaId j) const {
    return edges.count({i, j}) != 0;
  }
  bool adjacent(ReplicaId i, ReplicaId j) const { return has_edge(i, j); }
  /// X_ij; empty set when the edge is absent.
  const RegisterSet& registers_on(ReplicaId i, ReplicaId j) const;
  std::vector<ReplicaId> neighbors(ReplicaId i) const;
};

/// Share graph plus bidirectional edges between replica pairs co-assigned to
/// some client. Extra edges carry no registers.
struct AugmentedShareGraph {
  ShareGraph base;
  std::set<DirectedEdge> extra_edges;
  std::set<DirectedEdge> all_edges;

  bool adjacent(ReplicaId i, ReplicaId j) const {
    return all_edges.count({i, j}) != 0;
  }
};

ShareGraph build_share_graph(const Topology& topology);
AugmentedShareGraph build_augmented_share_graph(const Topology& topology);

/// Returns a topology enlarged with the given dummy copies. Rejects pairs
/// that are already real copies.
Topology apply_dummies(const Topology& topology,
                       const std::set<std::pair<ReplicaId, RegisterId>>& dummies);

}  // namespace causalmem
