#include "causalmem/client_server.hpp"

#include <algorithm>

namespace causalmem {

ClientState make_client(const Topology& topology,
                        const std::map<ReplicaId, TimestampGraph>& augmented,
                        ClientId c) {
  auto it = topology.client_replicas.find(c);
  if (it == topology.client_replicas.end()) {
    throw NotAccessible("unknown client " + std::to_string(c));
  }
  ClientState s;
  s.id = c;
  s.replicas = it->second;
  std::set<DirectedEdge> index;
  for (ReplicaId r : s.replicas) {
    const auto& edges = augmented.at(r).edges;
    index.insert(edges.begin(), edges.end());
  }
  s.mu = EdgeTimestamp::zeros(index);
  return s;
}

bool predicate_j1_j2(const EdgeTimestamp& replica_tau, ReplicaId i,
                     const EdgeTimestamp& client_mu) {
  for (const auto& [e, count] : replica_tau.counters) {
    if (e.to != i) continue;
    auto it = client_mu.counters.find(e);
    if (it != client_mu.counters.end() && count < it->second) return false;
  }
  return true;
}

EdgeTimestamp cs_advance(const ReplicaState& state, const ShareGraph& graph,
                         const EdgeTimestamp& client_mu, const RegisterId& x) {
  if (state.registers.count(x) == 0) {
    throw NotStored("replica " + std::to_string(state.id) +
                    " does not store " + x);
  }
  EdgeTimestamp out = state.tau;
  for (auto& [e, count] : out.counters) {
    if (e.from == state.id && graph.registers_on(e.from, e.to).count(x) != 0) {
      ++count;
    } else {
      auto it = client_mu.counters.find(e);
      if (it != client_mu.counters.end()) {
        count = std::max(count, it->second);
      }
    }
  }
  return out;
}

EdgeTimestamp client_merge(const ClientState& client, ReplicaId i,
                           const EdgeTimestamp& replica_tau) {
  if (client.replicas.count(i) == 0) {
    throw NotAccessible("client " + std::to_string(client.id) +
                        " cannot access replica " + std::to_string(i));
  }
  EdgeTimestamp out = client.mu;
  for (auto& [e, count] : out.counters) {
    auto it = replica_tau.counters.find(e);
    if (it != replica_tau.counters.end()) {
      count = std::max(count, it->second);
    }
  }
  return out;
}

ReplicaId select_serving_replica(const Topology& topology,
                                 const ClientState& client, const RegisterId& x,
                                 ReplicaId via) {
  if (via != 0) {
    if (client.replicas.count(via) == 0) {
      throw NotAccessible("client " + std::to_string(client.id) +
                          " cannot access replica " + std::to_string(via));
    }
    if (!topology.stores(via, x) || topology.is_dummy(via, x)) {
      throw NotAccessible("replica " + std::to_string(via) +
                          " has no real copy of " + x);
    }
    return via;
  }
  for (ReplicaId r : client.replicas) {  // ascending: lowest index wins
    if (topology.stores(r, x) && !topology.is_dummy(r, x)) return r;
  }
  throw NotAccessible("no replica accessible to client " +
                      std::to_string(client.id) + " stores " + x);
}

}  // namespace causalmem
