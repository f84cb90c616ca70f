#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "causalmem/graph_analysis.hpp"
#include "causalmem/topology.hpp"

namespace causalmem {

struct NotStored : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DummyAccess : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Misrouted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Vector of update counters indexed by the owner's timestamp-graph edges.
struct EdgeTimestamp {
  std::map<DirectedEdge, std::int64_t> counters;

  static EdgeTimestamp zeros(const std::set<DirectedEdge>& index);
  std::int64_t at(DirectedEdge e) const;
  bool has(DirectedEdge e) const { return counters.count(e) != 0; }

  bool operator==(const EdgeTimestamp&) const = default;
  auto operator<=>(const EdgeTimestamp&) const = default;
};

struct UpdateId {
  ReplicaId issuer = 0;
  std::int64_t seq = 0;
  auto operator<=>(const UpdateId&) const = default;
};

struct UpdateMessage {
  UpdateId id;
  EdgeTimestamp timestamp;  // issuer's tau at issue
  RegisterId reg;
  std::string value;
  bool metadata_only = false;  // dummy-copy recipient: no value applied
};

/// Test hook: individually disables the two clauses of predicate J.
struct JClauseToggle {
  bool successor_check = true;   // tau[e_ki] == T[e_ki] - 1
  bool dependency_check = true;  // tau[e_ji] >= T[e_ji] on shared incoming edges
};

struct ReplicaState {
  ReplicaId id = 0;
  EdgeTimestamp tau;
  std::map<RegisterId, std::string> store;  // real copies only
  RegisterSet registers;                    // X_i, dummies included
  RegisterSet dummy_regs;
  std::vector<UpdateMessage> pending;  // kept sorted by (issuer, seq)
  std::vector<UpdateId> applied_log;
  std::int64_t next_seq = 1;
};

/// Initializes a replica whose timestamp is indexed by tsg.edges.
ReplicaState make_replica(const Topology& topology, const TimestampGraph& tsg,
                          ReplicaId i);

std::string handle_read(const ReplicaState& state, const RegisterId& x);

/// advance(i, tau, x): +1 on every outgoing edge whose register set holds x.
EdgeTimestamp advance(const ReplicaState& state, const ShareGraph& graph,
                      const RegisterId& x);

struct WriteResult {
  UpdateId id;
  EdgeTimestamp stamp;
  std::vector<std::pair<ReplicaId, UpdateMessage>> messages;  // (recipient, msg)
};

/// Atomic write: store, advance, emit one update per other holder of x,
/// count the local issue as applied.
WriteResult handle_write(ReplicaState& state, const Topology& topology,
                         const ShareGraph& graph, const RegisterId& x,
                         const std::string& value);

/// Delivery predicate J: the update is the next one on e_ki and every shared
/// incoming dependency counter has caught up.
bool predicate_j(const EdgeTimestamp& receiver_tau, ReplicaId receiver,
                 ReplicaId sender, const EdgeTimestamp& sender_stamp,
                 const JClauseToggle& toggle = {});

/// Elementwise max over the shared index; receiver-only entries unchanged.
EdgeTimestamp merge(const EdgeTimestamp& receiver_tau,
                    const EdgeTimestamp& sender_stamp);

struct ReceiveOutcome {
  std::vector<UpdateId> applied;         // in application order
  std::vector<EdgeTimestamp> tau_after;  // receiver tau after each apply
  bool buffered = false;  // the incoming message did not fire at once
};

/// Buffers the message, then drains the pending set to a fixpoint in
/// deterministic (issuer, seq) order.
ReceiveOutcome receive_update(ReplicaState& state, const UpdateMessage& msg,
                              const JClauseToggle& toggle = {});

}  // namespace causalmem
