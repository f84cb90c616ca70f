#include "causalmem/checker.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace causalmem {

namespace {

std::string show(UpdateId u) {
  return "(" + std::to_string(u.issuer) + "," + std::to_string(u.seq) + ")";
}

struct UpdateInfo {
  ReplicaId issuer = 0;
  RegisterId reg;
  int issue_step = 0;
  EdgeTimestamp stamp;
};

/// Event-derived view of a trace: per-update metadata, per-replica apply
/// order, timestamp trajectories, send recipients, client serve history.
struct TraceIndex {
  std::map<UpdateId, UpdateInfo> updates;
  // Apply order at each replica; the local issue counts as an apply.
  std::map<ReplicaId, std::vector<std::pair<int, UpdateId>>> applied_at;
  std::map<ReplicaId, std::map<UpdateId, int>> applied_step;
  std::map<UpdateId, std::vector<ReplicaId>> recipients;
  std::map<ReplicaId, std::vector<std::pair<int, EdgeTimestamp>>> tau_history;
  struct Serve {
    int step = 0;
    ClientId client = 0;
    ReplicaId replica = 0;
    std::string request;
    std::optional<UpdateId> issued;
  };
  std::vector<Serve> serves;
  int request_count = 0;
  int serve_count = 0;
  bool quiesced = false;

  explicit TraceIndex(const Trace& trace) {
    for (const TraceEvent& ev : trace.events) {
      switch (ev.kind) {
        case TraceEvent::Kind::issue: {
          if (updates.count(ev.update) != 0) {
            throw MalformedTrace("duplicate issue of " + show(ev.update));
          }
          UpdateInfo info;
          info.issuer = ev.replica;
          info.reg = ev.reg;
          info.issue_step = ev.step;
          if (!ev.stamp) throw MalformedTrace("issue without timestamp");
          info.stamp = *ev.stamp;
          updates.emplace(ev.update, std::move(info));
          record_apply(ev.replica, ev.update, ev.step);
          tau_history[ev.replica].emplace_back(ev.step, *ev.stamp);
          break;
        }
        case TraceEvent::Kind::send:
          recipients[ev.update].push_back(ev.peer);
          break;
        case TraceEvent::Kind::apply: {
          if (updates.count(ev.update) == 0) {
            throw MalformedTrace("apply of unknown update " + show(ev.update));
          }
          record_apply(ev.replica, ev.update, ev.step);
          if (ev.stamp) tau_history[ev.replica].emplace_back(ev.step, *ev.stamp);
          break;
        }
        case TraceEvent::Kind::deliver:
        case TraceEvent::Kind::buffer:
          break;
        case TraceEvent::Kind::client_request:
          if (ev.client != 0) ++request_count;
          break;
        case TraceEvent::Kind::client_serve: {
          ++serve_count;
          Serve s;
          s.step = ev.step;
          s.client = ev.client;
          s.replica = ev.replica;
          s.request = ev.request;
          if (ev.request == "write") s.issued = ev.update;
          serves.push_back(std::move(s));
          break;
        }
        case TraceEvent::Kind::quiesce:
          quiesced = true;
          break;
      }
    }
  }

  void record_apply(ReplicaId i, UpdateId u, int step) {
    auto& steps = applied_step[i];
    if (steps.count(u) != 0) {
      throw MalformedTrace("update " + show(u) + " applied twice at replica " +
                           std::to_string(i));
    }
    steps[u] = step;
    applied_at[i].emplace_back(step, u);
  }

  /// Updates applied at replica i strictly before the given step.
  std::set<UpdateId> applied_before(ReplicaId i, int step) const {
    std::set<UpdateId> out;
    auto it = applied_at.find(i);
    if (it == applied_at.end()) return out;
    for (const auto& [s, u] : it->second) {
      if (s < step) out.insert(u);
    }
    return out;
  }
};

void close_transitively(std::map<UpdateId, std::set<UpdateId>>& deps) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [u, ds] : deps) {
      (void)u;
      std::set<UpdateId> extra;
      for (UpdateId d : ds) {
        auto it = deps.find(d);
        if (it == deps.end()) continue;
        for (UpdateId dd : it->second) {
          if (ds.count(dd) == 0) extra.insert(dd);
        }
      }
      if (!extra.empty()) {
        ds.insert(extra.begin(), extra.end());
        changed = true;
      }
    }
  }
}

}  // namespace

HappenedBefore happened_before(const Trace& trace, HbVariant variant) {
  TraceIndex index(trace);
  std::map<UpdateId, std::set<UpdateId>> deps;
  for (const auto& [u, info] : index.updates) {
    deps[u] = index.applied_before(info.issuer, info.issue_step);
    deps[u].erase(u);
  }
  if (variant == HbVariant::client_server) {
    // A client's session carries everything it has seen into its next write.
    std::map<ClientId, std::set<UpdateId>> known;
    for (const auto& serve : index.serves) {
      if (serve.issued) {
        auto& ds = deps[*serve.issued];
        const auto& seen = known[serve.client];
        ds.insert(seen.begin(), seen.end());
        ds.erase(*serve.issued);
      }
      std::set<UpdateId> visible =
          index.applied_before(serve.replica, serve.step);
      known[serve.client].insert(visible.begin(), visible.end());
    }
  }
  close_transitively(deps);
  HappenedBefore hb;
  hb.variant = variant;
  for (const auto& [u, ds] : deps) {
    for (UpdateId d : ds) {
      if (d != u) hb.pairs.insert({d, u});
    }
  }
  return hb;
}

SafetyResult check_safety(const Trace& trace, const Topology& topology,
                          const HappenedBefore& hb) {
  TraceIndex index(trace);
  SafetyResult result;
  for (const auto& [i, order] : index.applied_at) {
    std::set<UpdateId> have;
    for (const auto& [step, u1] : order) {
      (void)step;
      for (const auto& [u2, info] : index.updates) {
        if (u2 == u1 || !hb.before(u2, u1)) continue;
        if (!topology.stores(i, info.reg)) continue;
        if (have.count(u2) == 0) {
          result.pass = false;
          result.witness = "replica " + std::to_string(i) + " applied " +
                           show(u1) + " before its causal predecessor " +
                           show(u2) + " on " + info.reg;
          return result;
        }
      }
      have.insert(u1);
    }
  }
  if (hb.variant == HbVariant::client_server) {
    // Session clause: what a client has seen must be present, where stored,
    // at every replica that later serves it.
    std::map<ClientId, std::set<UpdateId>> known;
    for (const auto& serve : index.serves) {
      for (UpdateId u1 : known[serve.client]) {
        for (const auto& [u2, info] : index.updates) {
          if (u2 == u1 || !hb.before(u2, u1)) continue;
          if (!topology.stores(serve.replica, info.reg)) continue;
          auto steps = index.applied_step.find(serve.replica);
          bool ok = steps != index.applied_step.end() &&
                    steps->second.count(u2) != 0 &&
                    steps->second.at(u2) < serve.step;
          if (!ok) {
            result.pass = false;
            result.witness = "client " + std::to_string(serve.client) +
                             " served at replica " +
                             std::to_string(serve.replica) + " missing " +
                             show(u2) + " from its session history";
            return result;
          }
        }
      }
      std::set<UpdateId> visible =
          index.applied_before(serve.replica, serve.step);
      known[serve.client].insert(visible.begin(), visible.end());
    }
  }
  return result;
}

LivenessResult check_liveness(const Trace& trace, const Topology& topology) {
  TraceIndex index(trace);
  if (!index.quiesced) {
    throw IncompleteTrace("trace has no quiescence marker");
  }
  LivenessResult result;
  if (trace.stuck) {
    result.pass = false;
    result.witnesses = trace.stuck_detail;
  }
  for (const auto& [u, info] : index.updates) {
    for (ReplicaId j : topology.holders(info.reg)) {
      auto it = index.applied_step.find(j);
      if (it == index.applied_step.end() || it->second.count(u) == 0) {
        result.pass = false;
        result.witnesses.push_back("update " + show(u) + " on " + info.reg +
                                   " never applied at replica " +
                                   std::to_string(j));
      }
    }
  }
  if (index.serve_count < index.request_count) {
    result.pass = false;
    result.witnesses.push_back(
        std::to_string(index.request_count - index.serve_count) +
        " client request(s) never served");
  }
  return result;
}

std::vector<LemmaResult> check_lemmas(const Trace& trace,
                                      const Topology& topology,
                                      const HappenedBefore& hb) {
  TraceIndex index(trace);
  std::vector<LemmaResult> results;

  // Once tau_i[e_ji] has reached an incoming update's count on e_ji, that
  // update must already be applied at i.
  LemmaResult dominated{"applied_when_dominated", true, ""};
  for (const auto& [u, tos] : index.recipients) {
    const UpdateInfo& info = index.updates.at(u);
    for (ReplicaId i : tos) {
      DirectedEdge e{info.issuer, i};
      if (!info.stamp.has(e)) continue;
      std::int64_t sent = info.stamp.at(e);
      auto hist = index.tau_history.find(i);
      if (hist == index.tau_history.end()) continue;
      for (const auto& [step, tau] : hist->second) {
        if (!tau.has(e) || tau.at(e) < sent) continue;
        auto steps = index.applied_step.find(i);
        bool applied = steps != index.applied_step.end() &&
                       steps->second.count(u) != 0 &&
                       steps->second.at(u) <= step;
        if (!applied) {
          dominated.pass = false;
          dominated.witness =
              "replica " + std::to_string(i) + " counter on (" +
              std::to_string(e.from) + "," + std::to_string(e.to) +
              ") reached " + std::to_string(sent) + " at step " +
              std::to_string(step) + " without applying " + show(u);
        }
        break;
      }
      if (!dominated.pass) break;
    }
    if (!dominated.pass) break;
  }
  results.push_back(dominated);

  // Causally ordered updates to a common receiver carry ordered counters on
  // the earlier sender's edge, strictly so for same-sender chains.
  LemmaResult monotonic{"stamp_monotonic", true, ""};
  for (const auto& [u, tos] : index.recipients) {
    const UpdateInfo& ui = index.updates.at(u);
    for (const auto& [v, vtos] : index.recipients) {
      if (!hb.before(v, u)) continue;
      const UpdateInfo& vi = index.updates.at(v);
      for (ReplicaId i : tos) {
        if (std::find(vtos.begin(), vtos.end(), i) == vtos.end()) continue;
        DirectedEdge e{vi.issuer, i};
        if (!ui.stamp.has(e) || !vi.stamp.has(e)) continue;
        bool ok = vi.issuer == ui.issuer ? ui.stamp.at(e) > vi.stamp.at(e)
                                         : ui.stamp.at(e) >= vi.stamp.at(e);
        if (!ok) {
          monotonic.pass = false;
          monotonic.witness = "stamps of " + show(v) + " and " + show(u) +
                              " out of order on edge (" +
                              std::to_string(e.from) + "," +
                              std::to_string(e.to) + ")";
          break;
        }
      }
      if (!monotonic.pass) break;
    }
    if (!monotonic.pass) break;
  }
  results.push_back(monotonic);

  // Applying an update implies its locally relevant predecessors are applied.
  LemmaResult order{"causal_apply_order", true, ""};
  for (const auto& [i, applies] : index.applied_at) {
    std::set<UpdateId> have;
    for (const auto& [step, u] : applies) {
      (void)step;
      for (const auto& [v, vinfo] : index.updates) {
        if (v == u || !hb.before(v, u)) continue;
        if (!topology.stores(i, vinfo.reg)) continue;
        if (have.count(v) == 0) {
          order.pass = false;
          order.witness = "replica " + std::to_string(i) + " applied " +
                          show(u) + " before predecessor " + show(v);
          break;
        }
      }
      if (!order.pass) break;
      have.insert(u);
    }
    if (!order.pass) break;
  }
  results.push_back(order);
  return results;
}

std::set<UpdateId> causal_past(const Trace& trace, ReplicaId replica,
                               int at_step, const HappenedBefore& hb) {
  TraceIndex index(trace);
  std::set<UpdateId> past = index.applied_before(replica, at_step + 1);
  std::set<UpdateId> closure = past;
  for (UpdateId u : past) {
    for (const auto& [a, b] : hb.pairs) {
      if (b == u) closure.insert(a);
    }
  }
  return closure;
}

bool Verdict::pass() const {
  if (!safety.pass || !liveness.pass) return false;
  return std::all_of(lemmas.begin(), lemmas.end(),
                     [](const LemmaResult& l) { return l.pass; });
}

std::string Verdict::summary() const {
  std::ostringstream out;
  out << "safety=" << (safety.pass ? "pass" : "violation");
  if (!safety.pass) out << " [" << safety.witness << "]";
  out << " liveness=" << (liveness.pass ? "pass" : "stuck");
  for (const auto& w : liveness.witnesses) out << " [" << w << "]";
  for (const auto& l : lemmas) {
    out << " " << l.name << "=" << (l.pass ? "pass" : "fail");
    if (!l.pass) out << " [" << l.witness << "]";
  }
  return out.str();
}

Verdict check_trace(const Trace& trace, const Topology& topology) {
  HbVariant variant = trace.mode == Mode::client_server
                          ? HbVariant::client_server
                          : HbVariant::peer;
  HappenedBefore hb = happened_before(trace, variant);
  Verdict verdict;
  verdict.safety = check_safety(trace, topology, hb);
  verdict.liveness = check_liveness(trace, topology);
  verdict.lemmas = check_lemmas(trace, topology, hb);
  return verdict;
}

}  // namespace causalmem
