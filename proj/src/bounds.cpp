#include "causalmem/bounds.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_set>

#include <boost/dynamic_bitset.hpp>

#include "causalmem/graph_analysis.hpp"

namespace causalmem {

namespace {

constexpr std::size_t kStateBudget = 20000000;

bool strict_subset(const PastSet& a, const PastSet& b) {
  return a.size() < b.size() &&
         std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// All simple cycles through i, as vertex sequences i, v_1, .., v_c.
/// Each cycle appears in both traversal directions; callers that split the
/// cycle into two sides need both.
std::vector<std::vector<ReplicaId>> cycles_through(const ShareGraph& graph,
                                                   ReplicaId i) {
  std::vector<std::vector<ReplicaId>> out;
  std::vector<ReplicaId> path{i};
  std::set<ReplicaId> on_path{i};
  auto visit = [&](auto&& self, ReplicaId at) -> void {
    for (ReplicaId next : graph.neighbors(at)) {
      if (next == i) {
        if (path.size() >= 3) out.push_back(path);
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
  visit(visit, i);
  return out;
}

/// In-flight update together with the causal past of its writer at issue
/// time.  The past set, not the raw stamp, is what a later receiver folds
/// into its own accumulated past.
struct EnumMsg {
  UpdateMessage msg;
  std::set<UpdateId> deps;
};

struct EnumState {
  std::map<ReplicaId, ReplicaState> reps;
  // Accumulated causal past per replica: applied updates closed under the
  // writers' pasts.  A fresh write depends on exactly the writer's set.
  std::map<ReplicaId, std::set<UpdateId>> past;
  std::map<DirectedEdge, std::vector<EnumMsg>> channels;
  std::map<UpdateId, RegisterId> regs;
};

/// Compact binary fingerprint of a state.  Stamps of in-flight messages and
/// replica timestamps are functions of the encoded past sets and register
/// assignment, so the key keeps only counters that are cheap to compare.
std::string encode_state(const EnumState& s,
                         const std::map<RegisterId, int>& reg_index) {
  std::string out;
  out.reserve(192);
  auto put = [&](int v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
  };
  for (const auto& [j, rep] : s.reps) {
    put(j);
    for (const auto& [e, c] : rep.tau.counters) {
      (void)e;
      put(static_cast<int>(c));
    }
    put(rep.next_seq);
    const auto& past = s.past.at(j);
    put(static_cast<int>(past.size()));
    for (UpdateId u : past) {
      put(u.issuer);
      put(u.seq);
    }
  }
  for (const auto& [e, msgs] : s.channels) {
    put(-1);
    put(e.from);
    put(e.to);
    std::vector<const EnumMsg*> sorted;
    sorted.reserve(msgs.size());
    for (const EnumMsg& m : msgs) sorted.push_back(&m);
    std::sort(sorted.begin(), sorted.end(),
              [](const EnumMsg* a, const EnumMsg* b) {
                return a->msg.id < b->msg.id;
              });
    put(static_cast<int>(sorted.size()));
    for (const EnumMsg* m : sorted) {
      put(m->msg.id.issuer);
      put(m->msg.id.seq);
      put(static_cast<int>(m->deps.size()));
      for (UpdateId d : m->deps) {
        put(d.issuer);
        put(d.seq);
      }
    }
  }
  put(-2);
  for (const auto& [u, r] : s.regs) {
    put(u.issuer);
    put(u.seq);
    put(reg_index.at(r));
  }
  return out;
}

/// 128-bit fingerprint so the visited set stores 16 bytes per state instead
/// of the full key.  Two independent 64-bit FNV-style hashes make an
/// accidental collision vanishingly unlikely at the state-budget scale.
using StateKey = unsigned __int128;

struct StateKeyHash {
  std::size_t operator()(StateKey v) const {
    return static_cast<std::size_t>(v ^ (v >> 64));
  }
};

StateKey hash_state(const std::string& key) {
  std::uint64_t h1 = 1469598103934665603ull;
  std::uint64_t h2 = 0x9e3779b97f4a7c15ull;
  for (unsigned char c : key) {
    h1 = (h1 ^ c) * 1099511628211ull;
    h2 = (h2 ^ (c + 0x9e37u)) * 0xff51afd7ed558ccdull;
    h2 ^= h2 >> 33;
  }
  return (static_cast<StateKey>(h1) << 64) | h2;
}

PastSet past_of(const EnumState& s, ReplicaId i) {
  PastSet past;
  for (UpdateId u : s.past.at(i)) {
    past.insert(UpdateTag{u.issuer, u.seq, s.regs.at(u)});
  }
  return past;
}

}  // namespace

PastSet restrict_past(const PastSet& s, DirectedEdge e,
                      const ShareGraph& graph) {
  PastSet out;
  if (graph.edges.count(e) == 0) return out;
  const RegisterSet& regs = graph.registers_on(e.from, e.to);
  for (const UpdateTag& u : s) {
    if (u.issuer == e.from && regs.count(u.reg) != 0) out.insert(u);
  }
  return out;
}

std::optional<ConflictWitness> conflicts(const PastSet& s1, const PastSet& s2,
                                         ReplicaId i, const ShareGraph& graph) {
  for (DirectedEdge e : graph.edges) {
    if (restrict_past(s1, e, graph).empty() ||
        restrict_past(s2, e, graph).empty()) {
      return std::nullopt;
    }
  }
  std::vector<std::vector<ReplicaId>> loops;
  bool loops_ready = false;
  for (DirectedEdge e : graph.edges) {
    if (!strict_subset(restrict_past(s1, e, graph),
                       restrict_past(s2, e, graph))) {
      continue;
    }
    if (e.from == i || e.to == i) {
      ConflictWitness w;
      w.edge = e;
      w.via_incident = true;
      return w;
    }
    if (!loops_ready) {
      loops = cycles_through(graph, i);
      loops_ready = true;
    }
    for (const auto& cycle : loops) {
      std::size_t c = cycle.size() - 1;  // v_1 .. v_c after the leading i
      for (std::size_t s = 1; s < c; ++s) {
        std::vector<ReplicaId> l(cycle.begin() + 1, cycle.begin() + 1 + s);
        std::vector<ReplicaId> r(cycle.begin() + 1 + s, cycle.end());
        if (DirectedEdge{r.front(), l.back()} != e) continue;
        std::size_t t = r.size();
        auto r_at = [&](std::size_t p) {  // 1-based, r_{t+1} = i
          return p == t + 1 ? i : r[p - 1];
        };
        bool ok = true;
        // All loop edges from the r side into the l side agree, except e.
        for (std::size_t p = 1; p <= t + 1 && ok; ++p) {
          for (std::size_t q = 1; q <= s && ok; ++q) {
            DirectedEdge pe{r_at(p), l[q - 1]};
            if (pe == e) continue;
            if (restrict_past(s1, pe, graph) != restrict_past(s2, pe, graph)) {
              ok = false;
            }
          }
        }
        // Each r-side replica contributed some update in both pasts.
        for (std::size_t p = 1; p <= t && ok; ++p) {
          for (const PastSet* sx : {&s1, &s2}) {
            PastSet acc =
                restrict_past(*sx, {r_at(p), r_at(p + 1)}, graph);
            for (std::size_t q = 1; q <= s; ++q) {
              PastSet part = restrict_past(*sx, {r_at(p), l[q - 1]}, graph);
              acc.insert(part.begin(), part.end());
            }
            if (acc.empty()) {
              ok = false;
              break;
            }
          }
        }
        if (ok) {
          ConflictWitness w;
          w.edge = e;
          w.loop = cycle;
          return w;
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<EnumeratedPast> enumerate_causal_pasts(const Topology& topology,
                                                   ReplicaId i, int m,
                                                   bool override_guard) {
  topology.validate();
  if (!topology.has_replica(i)) {
    throw UnknownReplica("replica " + std::to_string(i));
  }
  if (m < 0) throw std::invalid_argument("m must be non-negative");
  if (!override_guard &&
      (topology.replica_registers.size() > 3 || m > 2)) {
    throw ExplosionGuard(
        "enumeration limited to 3 replicas and m <= 2 without override");
  }
  ShareGraph graph = build_share_graph(topology);

  std::map<RegisterId, int> reg_index;
  for (const auto& [j, regs] : topology.replica_registers) {
    (void)j;
    for (const RegisterId& r : regs) {
      reg_index.emplace(r, static_cast<int>(reg_index.size()));
    }
  }

  EnumState initial;
  for (const auto& [j, regs] : topology.replica_registers) {
    (void)regs;
    initial.reps.emplace(j,
                         make_replica(topology, timestamp_graph(graph, j), j));
    initial.past.emplace(j, std::set<UpdateId>{});
  }

  std::map<PastSet, EnumeratedPast> found;
  std::unordered_set<StateKey, StateKeyHash> visited;
  std::vector<Operation> path;

  auto note = [&](const EnumState& s) {
    PastSet past = past_of(s, i);
    auto [it, fresh] = found.try_emplace(past);
    if (fresh) {
      it->second.updates = past;
      it->second.witness_ops = path;
    }
    it->second.taus.insert(s.reps.at(i).tau);
  };

  // Depth-first search keeps the in-memory frontier at path depth; the
  // visited fingerprints are the only structure that grows with the space.
  auto dfs = [&](auto&& self, const EnumState& state) -> void {
    note(state);

    auto step = [&](EnumState&& next, Operation&& op) {
      StateKey key = hash_state(encode_state(next, reg_index));
      if (!visited.insert(key).second) return;
      if (visited.size() > kStateBudget) {
        throw ExplosionGuard("state budget exceeded during enumeration");
      }
      path.push_back(std::move(op));
      self(self, next);
      path.pop_back();
    };

    for (const auto& [j, rep] : state.reps) {
      if (rep.next_seq > m) continue;
      for (const RegisterId& x : topology.real_registers_of(j)) {
        EnumState next = state;
        std::set<UpdateId> below = next.past.at(j);
        WriteResult result =
            handle_write(next.reps.at(j), topology, graph, x, "");
        next.regs[result.id] = x;
        next.past.at(j).insert(result.id);
        for (auto& [k, msg] : result.messages) {
          next.channels[{j, k}].push_back(EnumMsg{std::move(msg), below});
        }
        Operation op;
        op.kind = Operation::Kind::write;
        op.replica = j;
        op.reg = x;
        step(std::move(next), std::move(op));
      }
    }
    for (const auto& [e, msgs] : state.channels) {
      for (std::size_t idx = 0; idx < msgs.size(); ++idx) {
        if (!predicate_j(state.reps.at(e.to).tau, e.to, e.from,
                         msgs[idx].msg.timestamp)) {
          continue;
        }
        EnumState next = state;
        auto& channel = next.channels.at(e);
        EnumMsg delivered = std::move(channel[idx]);
        channel.erase(channel.begin() + static_cast<std::ptrdiff_t>(idx));
        if (channel.empty()) next.channels.erase(e);
        receive_update(next.reps.at(e.to), delivered.msg);
        auto& receiver_past = next.past.at(e.to);
        receiver_past.insert(delivered.deps.begin(), delivered.deps.end());
        receiver_past.insert(delivered.msg.id);
        Operation op;
        op.kind = Operation::Kind::deliver;
        op.from = e.from;
        op.to = e.to;
        op.index = static_cast<int>(idx);
        step(std::move(next), std::move(op));
      }
    }
  };

  visited.insert(hash_state(encode_state(initial, reg_index)));
  dfs(dfs, initial);

  std::vector<EnumeratedPast> out;
  out.reserve(found.size());
  for (auto& [past, entry] : found) {
    (void)past;
    out.push_back(std::move(entry));
  }
  return out;
}

ConflictGraph build_conflict_graph(const std::vector<EnumeratedPast>& pasts,
                                   ReplicaId i, const ShareGraph& graph) {
  ConflictGraph h;
  for (const EnumeratedPast& p : pasts) h.vertices.push_back(p.updates);
  for (std::size_t a = 0; a < h.vertices.size(); ++a) {
    for (std::size_t b = a + 1; b < h.vertices.size(); ++b) {
      if (conflicts(h.vertices[a], h.vertices[b], i, graph) ||
          conflicts(h.vertices[b], h.vertices[a], i, graph)) {
        h.edges.insert({static_cast<int>(a), static_cast<int>(b)});
      }
    }
  }
  return h;
}

int chromatic_number(const ConflictGraph& h, int vertex_cap) {
  if (h.vertices.empty()) return 0;
  // Isolated vertices never raise the chromatic number past 1.
  std::map<int, std::set<int>> adj;
  for (const auto& [a, b] : h.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  if (adj.empty()) return 1;

  std::vector<int> verts;
  for (const auto& [v, ns] : adj) {
    (void)ns;
    verts.push_back(v);
  }
  int total = static_cast<int>(verts.size());
  std::map<int, int> pos;
  for (int k = 0; k < total; ++k) pos[verts[k]] = k;
  std::vector<boost::dynamic_bitset<>> nb(
      total, boost::dynamic_bitset<>(static_cast<std::size_t>(total)));
  for (int k = 0; k < total; ++k) {
    for (int w : adj[verts[k]]) nb[k].set(static_cast<std::size_t>(pos[w]));
  }

  // Dominated-vertex elimination: if u and v are non-adjacent and
  // N(u) is a subset of N(v), u can always reuse v's color, so dropping u
  // keeps the chromatic number.  Repeat to a fixed point.
  boost::dynamic_bitset<> alive(static_cast<std::size_t>(total));
  alive.set();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int u = 0; u < total; ++u) {
      if (!alive.test(static_cast<std::size_t>(u))) continue;
      for (int v = 0; v < total; ++v) {
        if (v == u || !alive.test(static_cast<std::size_t>(v))) continue;
        if (nb[u].test(static_cast<std::size_t>(v))) continue;
        if ((nb[u] & ~nb[v]).any()) continue;
        alive.reset(static_cast<std::size_t>(u));
        for (int w = 0; w < total; ++w) {
          nb[w].reset(static_cast<std::size_t>(u));
        }
        nb[u].reset();
        changed = true;
        break;
      }
    }
  }

  std::vector<int> active;
  for (int k = 0; k < total; ++k) {
    if (alive.test(static_cast<std::size_t>(k)) && nb[k].any()) {
      active.push_back(k);
    }
  }
  if (active.empty()) return 1;
  if (static_cast<int>(active.size()) > vertex_cap) {
    throw ExplosionGuard("conflict graph too large for exact coloring");
  }
  std::sort(active.begin(), active.end(), [&](int a, int b) {
    if (nb[a].count() != nb[b].count()) return nb[a].count() > nb[b].count();
    return a < b;
  });
  int n = static_cast<int>(active.size());
  std::map<int, int> index_of;
  for (int k = 0; k < n; ++k) index_of[active[k]] = k;
  std::vector<std::vector<int>> neighbors(n);
  for (int k = 0; k < n; ++k) {
    for (int w = 0; w < total; ++w) {
      if (nb[active[k]].test(static_cast<std::size_t>(w))) {
        neighbors[k].push_back(index_of.at(w));
      }
    }
  }

  // Greedy coloring on the degree order gives an upper bound; a greedy
  // clique gives a lower bound.  Branch and bound only runs in the gap.
  std::vector<int> greedy_color(n, -1);
  int upper = 0;
  for (int v = 0; v < n; ++v) {
    std::vector<bool> taken(static_cast<std::size_t>(upper + 1), false);
    for (int w : neighbors[v]) {
      if (greedy_color[w] >= 0 && greedy_color[w] <= upper) {
        taken[static_cast<std::size_t>(greedy_color[w])] = true;
      }
    }
    int c = 0;
    while (taken[static_cast<std::size_t>(c)]) ++c;
    greedy_color[v] = c;
    upper = std::max(upper, c + 1);
  }
  int lower = 0;
  {
    std::vector<int> clique;
    for (int v = 0; v < n; ++v) {
      bool fits = true;
      for (int w : clique) {
        if (std::find(neighbors[v].begin(), neighbors[v].end(), w) ==
            neighbors[v].end()) {
          fits = false;
          break;
        }
      }
      if (fits) clique.push_back(v);
    }
    lower = static_cast<int>(clique.size());
  }
  if (lower == upper) return upper;

  std::vector<int> color(n, -1);
  int best = upper;
  auto solve = [&](auto&& self, int v, int used) -> void {
    if (used >= best || best == lower) return;
    if (v == n) {
      best = used;
      return;
    }
    for (int c = 0; c < used; ++c) {
      bool ok = true;
      for (int w : neighbors[v]) {
        if (color[w] == c) {
          ok = false;
          break;
        }
      }
      if (ok) {
        color[v] = c;
        self(self, v + 1, used);
        color[v] = -1;
      }
    }
    if (used + 1 < best) {
      color[v] = used;
      self(self, v + 1, used + 1);
      color[v] = -1;
    }
  };
  solve(solve, 0, 0);
  return best;
}

BoundReport bound_report(const Topology& topology, ReplicaId i, int m,
                         bool override_guard) {
  std::vector<EnumeratedPast> pasts =
      enumerate_causal_pasts(topology, i, m, override_guard);
  ShareGraph graph = build_share_graph(topology);
  BoundReport report;
  report.replica = i;
  report.m = m;
  report.past_count = static_cast<int>(pasts.size());
  std::set<EdgeTimestamp> all_taus;
  for (const EnumeratedPast& p : pasts) {
    if (p.taus.size() != 1) report.constraint_ok = false;
    all_taus.insert(p.taus.begin(), p.taus.end());
  }
  report.realized_timestamps = static_cast<int>(all_taus.size());
  ConflictGraph h = build_conflict_graph(pasts, i, graph);
  report.chromatic = chromatic_number(h, 4096);
  report.inequality_ok = report.chromatic <= report.realized_timestamps;
  return report;
}

}  // namespace causalmem
