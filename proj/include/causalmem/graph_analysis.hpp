#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "causalmem/topology.hpp"

namespace causalmem {

struct NotASimpleLoop : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A candidate simple loop (i, l_1..l_s, r_1..r_t, i) examined against a
/// directed edge. l_s is the edge target, r_1 the edge source.
struct SimpleLoop {
  ReplicaId pivot = 0;
  std::vector<ReplicaId> l_path;  // l_1 .. l_s, l_s = edge target
  std::vector<ReplicaId> r_path;  // r_1 .. r_t, r_1 = edge source

  bool operator==(const SimpleLoop&) const = default;
};

/// Per-replica timestamp graph: the directed edges whose update counts the
/// replica keeps in its timestamp.
struct TimestampGraph {
  ReplicaId owner = 0;
  std::set<DirectedEdge> edges;
  std::set<ReplicaId> vertices;
  // One witnessing loop per non-incident edge.
  std::map<DirectedEdge, SimpleLoop> witnesses;

  bool contains(DirectedEdge e) const { return edges.count(e) != 0; }
};

/// True iff the candidate is an (i, e_jk)-loop: a simple loop whose l-side
/// replicas miss enough registers for a dependency chain from j to reach i
/// without touching them.
bool is_loop(const ShareGraph& graph, const SimpleLoop& candidate,
             DirectedEdge edge);

/// E_i: all edges incident at i plus every edge witnessed by an
/// (i, e_jk)-loop. cycle_cap limits loop length (0 = unlimited); a cap may
/// drop required edges and is meant for very large graphs only.
TimestampGraph timestamp_graph(const ShareGraph& graph, ReplicaId i,
                               int cycle_cap = 0);

/// Loop test over the augmented share graph: hops may also be justified by a
/// shared client instead of a shared register.
bool augmented_is_loop(const AugmentedShareGraph& ag, const Topology& topology,
                       const SimpleLoop& candidate, DirectedEdge edge);

/// Augmented timestamp graph: loop search runs over the augmented graph but
/// only share-graph edges are kept.
TimestampGraph augmented_timestamp_graph(const AugmentedShareGraph& ag,
                                         const Topology& topology, ReplicaId i,
                                         int cycle_cap = 0);

/// An x-hoop: a path between two holders of x whose interior avoids the
/// holders and whose every hop shares some register other than x.
struct Hoop {
  RegisterId reg;
  std::vector<ReplicaId> path;  // r_0 .. r_k, endpoints store reg

  bool operator==(const Hoop&) const = default;
};

enum class HoopVariant { original, modified };

/// All simple x-hoops up to length_cap hops (0 = |V|), deterministic order.
std::vector<Hoop> find_hoops(const ShareGraph& graph, const RegisterId& x,
                             int length_cap = 0);

/// Minimality test: the hops admit pairwise-distinct labels (never x) such
/// that no label is shared by both endpoints (original) or stored by more
/// than two hoop replicas (modified).
bool is_minimal_hoop(const ShareGraph& graph, const Hoop& hoop,
                     HoopVariant variant);

/// Tracking verdicts for one replica and one non-incident edge under the
/// three rules being compared.
struct ComparisonRow {
  ReplicaId replica = 0;
  DirectedEdge edge;
  bool timestamp_graph_rule = false;  // e in E_i
  bool hoop_rule = false;             // minimal-hoop rule, original
  bool modified_hoop_rule = false;    // minimal-hoop rule, modified
  bool disagreement() const {
    return timestamp_graph_rule != hoop_rule ||
           timestamp_graph_rule != modified_hoop_rule;
  }
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  bool has_disagreement() const;
};

/// For each replica and non-incident directed edge, reports whether the edge
/// must be tracked under E_i membership, the original minimal-hoop rule, and
/// the modified minimal-hoop rule.
ComparisonReport compare_conditions(const ShareGraph& graph);

}  // namespace causalmem
