#include "causalmem/topology.hpp"

#include <algorithm>

namespace causalmem {

namespace {

const RegisterSet kEmptySet;

RegisterSet intersect(const RegisterSet& a, const RegisterSet& b) {
  RegisterSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.begin()));
  return out;
}

}  // namespace

void Topology::validate() const {
  if (replica_registers.empty()) {
    throw InvalidTopology("topology has no replicas");
  }
  for (const auto& [id, regs] : replica_registers) {
    if (id < 1) {
      throw InvalidTopology("replica index must be >= 1, got " +
                            std::to_string(id));
    }
    if (regs.empty()) {
      throw InvalidTopology("replica " + std::to_string(id) +
                            " stores no registers");
    }
    for (const auto& x : regs) {
      if (x.empty()) {
        throw InvalidTopology("empty register name at replica " +
                              std::to_string(id));
      }
    }
  }
  for (const auto& [c, reps] : client_replicas) {
    if (c < 1) {
      throw InvalidTopology("client index must be >= 1, got " +
                            std::to_string(c));
    }
    if (reps.empty()) {
      throw InvalidTopology("client " + std::to_string(c) +
                            " has an empty replica set");
    }
    for (ReplicaId r : reps) {
      if (!has_replica(r)) {
        throw UnknownReplica("client " + std::to_string(c) +
                              " references unknown replica " +
                              std::to_string(r));
      }
    }
  }
  for (const auto& [r, x] : dummy_marks) {
    auto it = replica_registers.find(r);
    if (it == replica_registers.end() || it->second.count(x) == 0) {
      throw DummyConflict("dummy mark (" + std::to_string(r) + ", " + x +
                            ") is not a stored copy");
    }
  }
}

const RegisterSet& Topology::registers_of(ReplicaId i) const {
  auto it = replica_registers.find(i);
  if (it == replica_registers.end()) {
    throw UnknownReplica("unknown replica " + std::to_string(i));
  }
  return it->second;
}

bool Topology::stores(ReplicaId i, const RegisterId& x) const {
  auto it = replica_registers.find(i);
  return it != replica_registers.end() && it->second.count(x) != 0;
}

RegisterSet Topology::real_registers_of(ReplicaId i) const {
  RegisterSet out;
  for (const auto& x : registers_of(i)) {
    if (!is_dummy(i, x)) out.insert(x);
  }
  return out;
}

RegisterSet Topology::all_registers() const {
  RegisterSet out;
  for (const auto& [_, regs] : replica_registers) {
    out.insert(regs.begin(), regs.end());
  }
  return out;
}

std::vector<ReplicaId> Topology::holders(const RegisterId& x) const {
  std::vector<ReplicaId> out;
  for (const auto& [id, regs] : replica_registers) {
    if (regs.count(x) != 0) out.push_back(id);
  }
  return out;
}

const RegisterSet& ShareGraph::registers_on(ReplicaId i, ReplicaId j) const {
  auto it = edge_registers.find({i, j});
  return it == edge_registers.end() ? kEmptySet : it->second;
}

std::vector<ReplicaId> ShareGraph::neighbors(ReplicaId i) const {
  std::vector<ReplicaId> out;
  auto it = edges.lower_bound({i, 0});
  for (; it != edges.end() && it->from == i; ++it) {
    out.push_back(it->to);
  }
  return out;
}

ShareGraph build_share_graph(const Topology& topology) {
  topology.validate();
  ShareGraph g;
  for (const auto& [id, _] : topology.replica_registers) {
    g.vertices.insert(id);
  }
  for (auto i = topology.replica_registers.begin();
       i != topology.replica_registers.end(); ++i) {
    for (auto j = std::next(i); j != topology.replica_registers.end(); ++j) {
      RegisterSet shared = intersect(i->second, j->second);
      if (shared.empty()) continue;
      DirectedEdge fwd{i->first, j->first};
      DirectedEdge bwd{j->first, i->first};
      g.edges.insert(fwd);
      g.edges.insert(bwd);
      g.edge_registers[fwd] = shared;
      g.edge_registers[bwd] = std::move(shared);
    }
  }
  return g;
}

AugmentedShareGraph build_augmented_share_graph(const Topology& topology) {
  AugmentedShareGraph ag;
  ag.base = build_share_graph(topology);
  ag.all_edges = ag.base.edges;
  for (const auto& [_, reps] : topology.client_replicas) {
    for (auto a = reps.begin(); a != reps.end(); ++a) {
      for (auto b = std::next(a); b != reps.end(); ++b) {
        for (DirectedEdge e : {DirectedEdge{*a, *b}, DirectedEdge{*b, *a}}) {
          if (ag.all_edges.insert(e).second) {
            ag.extra_edges.insert(e);
          }
        }
      }
    }
  }
  return ag;
}

Topology apply_dummies(
    const Topology& topology,
    const std::set<std::pair<ReplicaId, RegisterId>>& dummies) {
  topology.validate();
  RegisterSet known = topology.all_registers();
  Topology out = topology;
  for (const auto& [r, x] : dummies) {
    if (!out.has_replica(r)) {
      throw UnknownReplica("dummy targets unknown replica " +
                           std::to_string(r));
    }
    if (known.count(x) == 0) {
      throw UnknownRegister("dummy register " + x + " is stored nowhere");
    }
    if (out.stores(r, x) && !out.is_dummy(r, x)) {
      throw DummyConflict("replica " + std::to_string(r) +
                          " already stores a real copy of " + x);
    }
    out.replica_registers[r].insert(x);
    out.dummy_marks.insert({r, x});
  }
  return out;
}

}  // namespace causalmem
