#pragma once

#include <boost/rational.hpp>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "causalmem/graph_analysis.hpp"
#include "causalmem/simulator.hpp"
#include "causalmem/topology.hpp"

namespace causalmem {

using Rational = boost::rational<long long>;

/// Compression of one source's outgoing counters: a basis I_j of the
/// register-incidence vectors of O_j, plus exact linear reconstructions of
/// the dropped edges over that basis.
struct SourcePlan {
  std::vector<DirectedEdge> outgoing;  // O_j, canonical order
  std::vector<DirectedEdge> basis;     // I_j, subset of O_j
  std::map<DirectedEdge, std::vector<std::pair<DirectedEdge, Rational>>>
      reconstruction;     // edge in O_j - I_j -> combination over basis
  RegisterSet registers;  // distinct registers across O_j
};

struct CompressionPlan {
  ReplicaId owner = 0;
  std::map<ReplicaId, SourcePlan> per_source;
  int compressed_count = 0;  // sum of |I_j|
  int full_count = 0;        // |E_i|
};

/// Basis and reconstructions per source, greedy over canonical edge order
/// with exact rational elimination.
CompressionPlan compression_plan(const ShareGraph& graph,
                                 const TimestampGraph& tsg);

struct RegisterLevelReport {
  // source -> (per-register counter count, edge-basis counter count)
  std::map<ReplicaId, std::pair<int, int>> per_source;
  int register_total = 0;
  int basis_total = 0;
};

/// Sizes of the alternative scheme that counts updates per register rather
/// than per basis edge.
RegisterLevelReport register_level_counts(const CompressionPlan& plan);

enum class DummyTarget { full_emulation, neighbors_and_loops };

/// Dummy-copy plan: full_emulation gives every replica a metadata copy of
/// every register it lacks; neighbors_and_loops only covers registers on the
/// edges of simple cycles through each replica.
std::set<std::pair<ReplicaId, RegisterId>> dummy_plan(const Topology& topology,
                                                      DummyTarget target);

/// Per-edge update totals of a trace: each issue on x increments every
/// outgoing edge of the issuer whose register set contains x. Used to verify
/// reconstruction soundness against executed workloads.
std::map<DirectedEdge, long long> edge_update_counts(const Trace& trace,
                                                     const ShareGraph& graph);

}  // namespace causalmem
