#include "causalmem/graph_analysis.hpp"

#include <algorithm>
#include <functional>

namespace causalmem {

namespace {

bool share_client(const Topology& topology, ReplicaId a, ReplicaId b) {
  for (const auto& [_, reps] : topology.client_replicas) {
    if (reps.count(a) != 0 && reps.count(b) != 0) return true;
  }
  return false;
}

struct LoopChecker {
  const ShareGraph& graph;
  const Topology* topology = nullptr;   // needed for X_v and client edges
  const AugmentedShareGraph* aug = nullptr;

  bool adjacent(ReplicaId a, ReplicaId b) const {
    return aug != nullptr ? aug->adjacent(a, b) : graph.adjacent(a, b);
  }

  bool covered_by(const RegisterId& x, const std::vector<ReplicaId>& vs,
                  size_t count) const {
    for (size_t p = 0; p < count; ++p) {
      if (topology->stores(vs[p], x)) return true;
    }
    return false;
  }

  bool residual_nonempty(const RegisterSet& regs,
                         const std::vector<ReplicaId>& vs, size_t count) const {
    return std::any_of(regs.begin(), regs.end(), [&](const RegisterId& x) {
      return !covered_by(x, vs, count);
    });
  }

  // Residual non-emptiness conditions over a validated simple loop. The
  // augmented
  // variant additionally accepts a hop when its endpoints share a client.
  bool conditions_hold(const SimpleLoop& loop, DirectedEdge edge) const {
    const auto& l = loop.l_path;
    const auto& r = loop.r_path;
    const size_t s = l.size();
    const size_t t = r.size();
    const bool augmented = aug != nullptr;

    // (i) X_jk minus registers of l_1..l_{s-1}
    if (!residual_nonempty(graph.registers_on(edge.from, edge.to), l, s - 1)) {
      return false;
    }
    // (ii) X_{j r_2} minus registers of l_1..l_{s-1}; r_{t+1} = i
    ReplicaId r2 = t >= 2 ? r[1] : loop.pivot;
    bool ok2 = residual_nonempty(graph.registers_on(edge.from, r2), l, s - 1);
    if (!ok2 && augmented) ok2 = share_client(*topology, edge.from, r2);
    if (!ok2) return false;
    // (iii) for 2 <= q <= t: X_{r_q r_{q+1}} minus registers of l_1..l_s
    for (size_t q = 2; q <= t; ++q) {
      ReplicaId a = r[q - 1];
      ReplicaId b = q == t ? loop.pivot : r[q];
      bool ok = residual_nonempty(graph.registers_on(a, b), l, s);
      if (!ok && augmented) ok = share_client(*topology, a, b);
      if (!ok) return false;
    }
    return true;
  }

  void validate_shape(const SimpleLoop& loop, DirectedEdge edge) const {
    const auto& l = loop.l_path;
    const auto& r = loop.r_path;
    if (l.empty() || r.empty()) {
      throw NotASimpleLoop("loop paths must be non-empty");
    }
    if (l.back() != edge.to || r.front() != edge.from) {
      throw NotASimpleLoop("loop endpoints do not match the edge");
    }
    if (edge.from == loop.pivot || edge.to == loop.pivot) {
      throw NotASimpleLoop("edge must not be incident at the pivot");
    }
    std::set<ReplicaId> seen{loop.pivot};
    for (ReplicaId v : l) {
      if (!seen.insert(v).second) throw NotASimpleLoop("repeated vertex");
    }
    for (ReplicaId v : r) {
      if (!seen.insert(v).second) throw NotASimpleLoop("repeated vertex");
    }
    ReplicaId prev = loop.pivot;
    for (ReplicaId v : l) {
      if (!adjacent(prev, v)) throw NotASimpleLoop("non-adjacent hop");
      prev = v;
    }
    if (!adjacent(prev, r.front())) throw NotASimpleLoop("non-adjacent hop");
    prev = r.front();
    for (size_t q = 1; q < r.size(); ++q) {
      if (!adjacent(prev, r[q])) throw NotASimpleLoop("non-adjacent hop");
      prev = r[q];
    }
    if (!adjacent(prev, loop.pivot)) throw NotASimpleLoop("non-adjacent hop");
  }

  // Searches for any accepting loop for edge e_jk through the pivot.
  std::optional<SimpleLoop> find_witness(ReplicaId pivot, DirectedEdge edge,
                                         int cycle_cap) const {
    const ReplicaId j = edge.from;
    const ReplicaId k = edge.to;
    std::optional<SimpleLoop> found;
    std::vector<ReplicaId> l_path, r_path;
    std::set<ReplicaId> used{pivot};

    std::function<bool()> extend_r = [&]() {
      ReplicaId at = r_path.back();
      if (adjacent(at, pivot)) {
        SimpleLoop cand{pivot, l_path, r_path};
        if (conditions_hold(cand, edge)) {
          found = std::move(cand);
          return true;
        }
      }
      if (cycle_cap > 0 &&
          static_cast<int>(l_path.size() + r_path.size()) + 1 >= cycle_cap) {
        return false;
      }
      for (ReplicaId next : neighbors_of(at)) {
        if (used.count(next) != 0) continue;
        used.insert(next);
        r_path.push_back(next);
        bool done = extend_r();
        r_path.pop_back();
        used.erase(next);
        if (done) return true;
      }
      return false;
    };

    std::function<bool(ReplicaId)> extend_l = [&](ReplicaId at) -> bool {
      if (cycle_cap > 0 &&
          static_cast<int>(l_path.size()) + 2 >= cycle_cap) {
        return false;
      }
      for (ReplicaId next : neighbors_of(at)) {
        if (next == j || used.count(next) != 0) continue;
        used.insert(next);
        l_path.push_back(next);
        bool done = false;
        if (next == k) {
          if (adjacent(k, j)) {
            used.insert(j);
            r_path.push_back(j);
            done = extend_r();
            r_path.pop_back();
            used.erase(j);
          }
        } else {
          done = extend_l(next);
        }
        l_path.pop_back();
        used.erase(next);
        if (done) return true;
      }
      return false;
    };

    extend_l(pivot);
    return found;
  }

  std::vector<ReplicaId> neighbors_of(ReplicaId v) const {
    if (aug == nullptr) return graph.neighbors(v);
    std::vector<ReplicaId> out;
    auto it = aug->all_edges.lower_bound({v, 0});
    for (; it != aug->all_edges.end() && it->from == v; ++it) {
      out.push_back(it->to);
    }
    return out;
  }

  TimestampGraph build(ReplicaId i, int cycle_cap) const {
    const auto& vertices =
        aug == nullptr ? graph.vertices : aug->base.vertices;
    if (vertices.count(i) == 0) {
      throw UnknownReplica("unknown replica " + std::to_string(i));
    }
    TimestampGraph out;
    out.owner = i;
    for (DirectedEdge e : graph.edges) {
      if (e.from == i || e.to == i) {
        // Incident in the augmented graph is a superset, but only
        // share-graph edges are ever kept.
        out.edges.insert(e);
      }
    }
    for (DirectedEdge e : graph.edges) {
      if (e.from == i || e.to == i) continue;
      if (auto w = find_witness(i, e, cycle_cap)) {
        out.edges.insert(e);
        out.witnesses.emplace(e, std::move(*w));
      }
    }
    for (DirectedEdge e : out.edges) {
      out.vertices.insert(e.from);
      out.vertices.insert(e.to);
    }
    return out;
  }
};

// Loop conditions need X_v per vertex, which the share graph does not carry.
// Reconstruct from edge labels: every register the conditions ever test is
// shared, hence appears on an incident edge of each replica storing it.
Topology topology_from_graph(const ShareGraph& graph) {
  Topology t;
  for (ReplicaId v : graph.vertices) t.replica_registers[v] = {};
  for (const auto& [e, regs] : graph.edge_registers) {
    t.replica_registers[e.from].insert(regs.begin(), regs.end());
  }
  return t;
}

}  // namespace

bool is_loop(const ShareGraph& graph, const SimpleLoop& candidate,
             DirectedEdge edge) {
  if (graph.edges.count(edge) == 0) {
    throw NotASimpleLoop("edge is not in the share graph");
  }
  Topology derived = topology_from_graph(graph);
  LoopChecker checker{graph, &derived};
  checker.validate_shape(candidate, edge);
  return checker.conditions_hold(candidate, edge);
}

TimestampGraph timestamp_graph(const ShareGraph& graph, ReplicaId i,
                               int cycle_cap) {
  Topology derived = topology_from_graph(graph);
  LoopChecker checker{graph, &derived};
  return checker.build(i, cycle_cap);
}

bool augmented_is_loop(const AugmentedShareGraph& ag, const Topology& topology,
                       const SimpleLoop& candidate, DirectedEdge edge) {
  if (ag.all_edges.count(edge) == 0) {
    throw NotASimpleLoop("edge is not in the augmented share graph");
  }
  LoopChecker checker{ag.base, &topology, &ag};
  checker.validate_shape(candidate, edge);
  return checker.conditions_hold(candidate, edge);
}

TimestampGraph augmented_timestamp_graph(const AugmentedShareGraph& ag,
                                         const Topology& topology, ReplicaId i,
                                         int cycle_cap) {
  LoopChecker checker{ag.base, &topology, &ag};
  return checker.build(i, cycle_cap);
}

std::vector<Hoop> find_hoops(const ShareGraph& graph, const RegisterId& x,
                             int length_cap) {
  Topology derived = topology_from_graph(graph);
  std::vector<ReplicaId> holders;
  for (ReplicaId v : graph.vertices) {
    if (derived.replica_registers.at(v).count(x) != 0) holders.push_back(v);
  }
  if (holders.size() < 2) {
    throw UnknownRegister("register " + x +
                          " is not shared by at least two replicas");
  }
  std::set<ReplicaId> holder_set(holders.begin(), holders.end());
  int cap = length_cap > 0 ? length_cap
                           : static_cast<int>(graph.vertices.size());

  auto hop_ok = [&](ReplicaId a, ReplicaId b) {
    const RegisterSet& regs = graph.registers_on(a, b);
    return std::any_of(regs.begin(), regs.end(),
                       [&](const RegisterId& r) { return r != x; });
  };

  std::vector<Hoop> out;
  for (ReplicaId start : holders) {
    std::vector<ReplicaId> path{start};
    std::set<ReplicaId> used{start};
    std::function<void(ReplicaId)> dfs = [&](ReplicaId at) {
      for (ReplicaId next : graph.neighbors(at)) {
        if (used.count(next) != 0 || !hop_ok(at, next)) continue;
        if (holder_set.count(next) != 0) {
          if (next > start) {  // canonical direction, no duplicates
            path.push_back(next);
            out.push_back(Hoop{x, path});
            path.pop_back();
          }
          continue;  // endpoints terminate the path
        }
        if (static_cast<int>(path.size()) >= cap) continue;
        used.insert(next);
        path.push_back(next);
        dfs(next);
        path.pop_back();
        used.erase(next);
      }
    };
    dfs(start);
  }
  std::sort(out.begin(), out.end(), [](const Hoop& a, const Hoop& b) {
    return a.path < b.path;
  });
  return out;
}

bool is_minimal_hoop(const ShareGraph& graph, const Hoop& hoop,
                     HoopVariant variant) {
  if (hoop.path.size() < 2) {
    throw NotASimpleLoop("hoop must have at least one hop");
  }
  Topology derived = topology_from_graph(graph);
  const ReplicaId ra = hoop.path.front();
  const ReplicaId rb = hoop.path.back();
  std::set<ReplicaId> members(hoop.path.begin(), hoop.path.end());

  auto label_ok = [&](const RegisterId& label) {
    if (label == hoop.reg) return false;
    if (variant == HoopVariant::original) {
      return !(derived.stores(ra, label) && derived.stores(rb, label));
    }
    int stored_by = 0;
    for (ReplicaId v : members) {
      if (derived.stores(v, label)) ++stored_by;
    }
    return stored_by <= 2;
  };

  // Backtracking search for pairwise-distinct admissible labels.
  const size_t hops = hoop.path.size() - 1;
  std::vector<std::vector<RegisterId>> choices(hops);
  for (size_t h = 0; h < hops; ++h) {
    for (const auto& r :
         graph.registers_on(hoop.path[h], hoop.path[h + 1])) {
      if (label_ok(r)) choices[h].push_back(r);
    }
    if (choices[h].empty()) return false;
  }
  std::set<RegisterId> taken;
  std::function<bool(size_t)> assign = [&](size_t h) -> bool {
    if (h == hops) return true;
    for (const auto& r : choices[h]) {
      if (taken.count(r) != 0) continue;
      taken.insert(r);
      if (assign(h + 1)) return true;
      taken.erase(r);
    }
    return false;
  };
  return assign(0);
}

bool ComparisonReport::has_disagreement() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const ComparisonRow& r) { return r.disagreement(); });
}

ComparisonReport compare_conditions(const ShareGraph& graph) {
  Topology derived = topology_from_graph(graph);

  // For each register shared by >= 2 replicas, which replicas sit inside a
  // minimal hoop under each variant.
  std::map<RegisterId, std::set<ReplicaId>> in_minimal_original;
  std::map<RegisterId, std::set<ReplicaId>> in_minimal_modified;
  RegisterSet shared;
  for (const auto& [_, regs] : graph.edge_registers) {
    shared.insert(regs.begin(), regs.end());
  }
  for (const auto& x : shared) {
    for (const Hoop& h : find_hoops(graph, x)) {
      bool orig = is_minimal_hoop(graph, h, HoopVariant::original);
      bool mod = is_minimal_hoop(graph, h, HoopVariant::modified);
      for (ReplicaId v : h.path) {
        if (orig) in_minimal_original[x].insert(v);
        if (mod) in_minimal_modified[x].insert(v);
      }
    }
  }

  ComparisonReport report;
  for (ReplicaId i : graph.vertices) {
    TimestampGraph tsg = timestamp_graph(graph, i);
    for (DirectedEdge e : graph.edges) {
      if (e.from == i || e.to == i) continue;
      ComparisonRow row;
      row.replica = i;
      row.edge = e;
      row.timestamp_graph_rule = tsg.contains(e);
      for (const auto& x : graph.registers_on(e.from, e.to)) {
        bool stores_x = derived.stores(i, x);
        auto orig = in_minimal_original.find(x);
        auto mod = in_minimal_modified.find(x);
        if (stores_x ||
            (orig != in_minimal_original.end() && orig->second.count(i))) {
          row.hoop_rule = true;
        }
        if (stores_x ||
            (mod != in_minimal_modified.end() && mod->second.count(i))) {
          row.modified_hoop_rule = true;
        }
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace causalmem
