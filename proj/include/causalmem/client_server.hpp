#pragma once

#include "causalmem/protocol.hpp"

namespace causalmem {

struct NotAccessible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Client-held timestamp, indexed by the union of the augmented timestamp
/// graphs of every replica the client may access.
struct ClientState {
  ClientId id = 0;
  EdgeTimestamp mu;
  std::set<ReplicaId> replicas;  // R_c
};

/// Builds client state over the augmented timestamp graphs of its replicas.
ClientState make_client(const Topology& topology,
                        const std::map<ReplicaId, TimestampGraph>& augmented,
                        ClientId c);

/// J1 = J2: the replica's counters dominate the client's on every incoming
/// edge of the replica.
bool predicate_j1_j2(const EdgeTimestamp& replica_tau, ReplicaId i,
                     const EdgeTimestamp& client_mu);

/// Client-server advance: +1 on outgoing edges sharing x, max with the
/// client's counter elsewhere (the client carries dependencies in).
EdgeTimestamp cs_advance(const ReplicaState& state, const ShareGraph& graph,
                         const EdgeTimestamp& client_mu, const RegisterId& x);

/// merge1 = merge2: client folds a served replica's timestamp into mu.
EdgeTimestamp client_merge(const ClientState& client, ReplicaId i,
                           const EdgeTimestamp& replica_tau);

/// Picks the serving replica for a client operation on x: the `via` override
/// when given, else the lowest-index accessible replica with a real copy.
ReplicaId select_serving_replica(const Topology& topology,
                                 const ClientState& client, const RegisterId& x,
                                 ReplicaId via = 0);

// Replica-to-replica delivery in client-server mode uses predicate_j /
// merge / receive_update unchanged: J3 and merge3 have the same form, over
// the augmented timestamp-graph indices the states are built with.

}  // namespace causalmem
