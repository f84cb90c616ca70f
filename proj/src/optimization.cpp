#include "causalmem/optimization.hpp"

#include <algorithm>

namespace causalmem {

namespace {

using Vec = std::vector<Rational>;
using Combo = std::map<DirectedEdge, Rational>;

struct ReducedRow {
  Vec vec;
  std::size_t pivot = 0;
  Combo combo;  // representation over basis edge vectors
};

// Note: comparisons always go through Rational operands; mixing in plain int
// literals trips an infinite recursion in boost::rational's heterogeneous
// operator== on some Boost versions.
bool is_zero(const Vec& v) {
  return std::all_of(v.begin(), v.end(),
                     [](const Rational& r) { return r.numerator() == 0; });
}

}  // namespace

CompressionPlan compression_plan(const ShareGraph& graph,
                                 const TimestampGraph& tsg) {
  CompressionPlan plan;
  plan.owner = tsg.owner;
  plan.full_count = static_cast<int>(tsg.edges.size());

  std::map<ReplicaId, std::vector<DirectedEdge>> outgoing;
  for (DirectedEdge e : tsg.edges) outgoing[e.from].push_back(e);

  for (auto& [j, edges] : outgoing) {
    std::sort(edges.begin(), edges.end());
    SourcePlan sp;
    sp.outgoing = edges;
    for (DirectedEdge e : edges) {
      const RegisterSet& regs = graph.registers_on(e.from, e.to);
      sp.registers.insert(regs.begin(), regs.end());
    }
    std::vector<RegisterId> universe(sp.registers.begin(), sp.registers.end());
    auto column = [&universe](const RegisterId& x) {
      return static_cast<std::size_t>(
          std::lower_bound(universe.begin(), universe.end(), x) -
          universe.begin());
    };

    std::vector<ReducedRow> rows;
    for (DirectedEdge e : edges) {
      Vec v(universe.size(), Rational(0));
      for (const RegisterId& x : graph.registers_on(e.from, e.to)) {
        v[column(x)] = Rational(1);
      }
      Combo recon;
      for (const ReducedRow& row : rows) {
        if (v[row.pivot].numerator() == 0) continue;
        Rational factor = v[row.pivot] / row.vec[row.pivot];
        for (std::size_t c = 0; c < v.size(); ++c) {
          v[c] -= factor * row.vec[c];
        }
        for (const auto& [b, coeff] : row.combo) {
          recon[b] += factor * coeff;
        }
      }
      if (is_zero(v)) {
        std::vector<std::pair<DirectedEdge, Rational>> combo;
        for (const auto& [b, coeff] : recon) {
          if (coeff.numerator() != 0) combo.emplace_back(b, coeff);
        }
        sp.reconstruction[e] = std::move(combo);
      } else {
        ReducedRow row;
        row.vec = std::move(v);
        while (row.vec[row.pivot].numerator() == 0) ++row.pivot;
        row.combo[e] = Rational(1);
        for (const auto& [b, coeff] : recon) {
          row.combo[b] -= coeff;
        }
        rows.push_back(std::move(row));
        sp.basis.push_back(e);
      }
    }
    plan.compressed_count += static_cast<int>(sp.basis.size());
    plan.per_source.emplace(j, std::move(sp));
  }
  return plan;
}

RegisterLevelReport register_level_counts(const CompressionPlan& plan) {
  RegisterLevelReport report;
  for (const auto& [j, sp] : plan.per_source) {
    int regs = static_cast<int>(sp.registers.size());
    int basis = static_cast<int>(sp.basis.size());
    report.per_source[j] = {regs, basis};
    report.register_total += regs;
    report.basis_total += basis;
  }
  return report;
}

std::set<std::pair<ReplicaId, RegisterId>> dummy_plan(const Topology& topology,
                                                      DummyTarget target) {
  topology.validate();
  std::set<std::pair<ReplicaId, RegisterId>> plan;
  RegisterSet all = topology.all_registers();
  if (target == DummyTarget::full_emulation) {
    for (const auto& [i, regs] : topology.replica_registers) {
      for (const RegisterId& x : all) {
        if (regs.count(x) == 0) plan.insert({i, x});
      }
    }
    return plan;
  }

  // neighbors_and_loops: registers on edges of simple cycles through j.
  // Registers shared with direct neighbors are stored at j already, so only
  // cycle edges can contribute new dummies.
  ShareGraph graph = build_share_graph(topology);
  for (ReplicaId j : graph.vertices) {
    RegisterSet needed;
    std::vector<ReplicaId> path{j};
    std::set<ReplicaId> on_path{j};
    auto visit = [&](auto&& self, ReplicaId at) -> void {
      for (ReplicaId next : graph.neighbors(at)) {
        if (next == j && path.size() >= 3) {
          for (std::size_t p = 0; p < path.size(); ++p) {
            ReplicaId a = path[p];
            ReplicaId b = path[(p + 1) % path.size()];
            const RegisterSet& regs = graph.registers_on(a, b);
            needed.insert(regs.begin(), regs.end());
          }
          continue;
        }
        if (on_path.count(next) != 0) continue;
        path.push_back(next);
        on_path.insert(next);
        self(self, next);
        path.pop_back();
        on_path.erase(next);
      }
    };
    for (ReplicaId first : graph.neighbors(j)) {
      path.push_back(first);
      on_path.insert(first);
      visit(visit, first);
      path.pop_back();
      on_path.erase(first);
    }
    for (const RegisterId& x : needed) {
      if (!topology.stores(j, x)) plan.insert({j, x});
    }
  }
  return plan;
}

std::map<DirectedEdge, long long> edge_update_counts(const Trace& trace,
                                                     const ShareGraph& graph) {
  std::map<DirectedEdge, long long> counts;
  for (DirectedEdge e : graph.edges) counts[e] = 0;
  for (const TraceEvent& ev : trace.events) {
    if (ev.kind != TraceEvent::Kind::issue) continue;
    for (ReplicaId k : graph.neighbors(ev.replica)) {
      if (graph.registers_on(ev.replica, k).count(ev.reg) != 0) {
        ++counts[{ev.replica, k}];
      }
    }
  }
  return counts;
}

}  // namespace causalmem
