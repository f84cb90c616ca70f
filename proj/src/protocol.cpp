#include "causalmem/protocol.hpp"

#include <algorithm>

namespace causalmem {

EdgeTimestamp EdgeTimestamp::zeros(const std::set<DirectedEdge>& index) {
  EdgeTimestamp t;
  for (DirectedEdge e : index) t.counters[e] = 0;
  return t;
}

std::int64_t EdgeTimestamp::at(DirectedEdge e) const {
  auto it = counters.find(e);
  if (it == counters.end()) {
    throw std::out_of_range("timestamp has no entry for edge (" +
                            std::to_string(e.from) + "," +
                            std::to_string(e.to) + ")");
  }
  return it->second;
}

ReplicaState make_replica(const Topology& topology, const TimestampGraph& tsg,
                          ReplicaId i) {
  ReplicaState s;
  s.id = i;
  s.tau = EdgeTimestamp::zeros(tsg.edges);
  s.registers = topology.registers_of(i);
  for (const auto& x : s.registers) {
    if (topology.is_dummy(i, x)) {
      s.dummy_regs.insert(x);
    } else {
      s.store[x] = {};
    }
  }
  return s;
}

std::string handle_read(const ReplicaState& state, const RegisterId& x) {
  if (state.registers.count(x) == 0) {
    throw NotStored("replica " + std::to_string(state.id) +
                    " does not store " + x);
  }
  if (state.dummy_regs.count(x) != 0) {
    throw DummyAccess("register " + x + " is a dummy copy at replica " +
                      std::to_string(state.id));
  }
  return state.store.at(x);
}

EdgeTimestamp advance(const ReplicaState& state, const ShareGraph& graph,
                      const RegisterId& x) {
  if (state.registers.count(x) == 0) {
    throw NotStored("replica " + std::to_string(state.id) +
                    " does not store " + x);
  }
  EdgeTimestamp out = state.tau;
  for (auto& [e, count] : out.counters) {
    if (e.from == state.id && graph.registers_on(e.from, e.to).count(x) != 0) {
      ++count;
    }
  }
  return out;
}

WriteResult handle_write(ReplicaState& state, const Topology& topology,
                         const ShareGraph& graph, const RegisterId& x,
                         const std::string& value) {
  if (state.dummy_regs.count(x) != 0) {
    throw DummyAccess("write to dummy copy of " + x + " at replica " +
                      std::to_string(state.id));
  }
  EdgeTimestamp stamped = advance(state, graph, x);
  state.store[x] = value;
  state.tau = stamped;
  WriteResult result;
  result.id = UpdateId{state.id, state.next_seq++};
  result.stamp = stamped;
  state.applied_log.push_back(result.id);
  for (ReplicaId k : topology.holders(x)) {
    if (k == state.id) continue;
    UpdateMessage msg;
    msg.id = result.id;
    msg.timestamp = stamped;
    msg.reg = x;
    msg.metadata_only = topology.is_dummy(k, x);
    if (!msg.metadata_only) msg.value = value;
    result.messages.emplace_back(k, std::move(msg));
  }
  return result;
}

bool predicate_j(const EdgeTimestamp& receiver_tau, ReplicaId receiver,
                 ReplicaId sender, const EdgeTimestamp& sender_stamp,
                 const JClauseToggle& toggle) {
  DirectedEdge e_ki{sender, receiver};
  if (toggle.successor_check &&
      receiver_tau.at(e_ki) != sender_stamp.at(e_ki) - 1) {
    return false;
  }
  if (toggle.dependency_check) {
    for (const auto& [e, sent] : sender_stamp.counters) {
      if (e.to != receiver || e.from == sender) continue;
      auto mine = receiver_tau.counters.find(e);
      if (mine != receiver_tau.counters.end() && mine->second < sent) {
        return false;
      }
    }
  }
  return true;
}

EdgeTimestamp merge(const EdgeTimestamp& receiver_tau,
                    const EdgeTimestamp& sender_stamp) {
  EdgeTimestamp out = receiver_tau;
  for (auto& [e, count] : out.counters) {
    auto it = sender_stamp.counters.find(e);
    if (it != sender_stamp.counters.end()) {
      count = std::max(count, it->second);
    }
  }
  return out;
}

ReceiveOutcome receive_update(ReplicaState& state, const UpdateMessage& msg,
                              const JClauseToggle& toggle) {
  if (state.registers.count(msg.reg) == 0) {
    throw Misrouted("update on " + msg.reg + " misrouted to replica " +
                    std::to_string(state.id));
  }
  auto pos = std::lower_bound(
      state.pending.begin(), state.pending.end(), msg,
      [](const UpdateMessage& a, const UpdateMessage& b) { return a.id < b.id; });
  state.pending.insert(pos, msg);

  ReceiveOutcome outcome;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (auto it = state.pending.begin(); it != state.pending.end(); ++it) {
      if (!predicate_j(state.tau, state.id, it->id.issuer, it->timestamp,
                       toggle)) {
        continue;
      }
      UpdateMessage fired = *it;
      state.pending.erase(it);
      if (!fired.metadata_only) {
        state.store[fired.reg] = fired.value;
      }
      state.tau = merge(state.tau, fired.timestamp);
      state.applied_log.push_back(fired.id);
      outcome.applied.push_back(fired.id);
      outcome.tau_after.push_back(state.tau);
      progressed = true;
      break;  // rescan from the front after every merge
    }
  }
  outcome.buffered =
      outcome.applied.empty() || outcome.applied.front() != msg.id;
  return outcome;
}

}  // namespace causalmem
