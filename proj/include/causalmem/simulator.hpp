#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "causalmem/client_server.hpp"
#include "causalmem/protocol.hpp"
#include "causalmem/topology.hpp"

namespace causalmem {

enum class Mode { peer, client_server };

enum class DeliveryPolicy { random, script };

struct Operation {
  enum class Kind { write, read, client_write, client_read, deliver, deliver_all };
  Kind kind = Kind::write;
  ReplicaId replica = 0;  // write/read
  ClientId client = 0;    // client_write/client_read
  RegisterId reg;
  std::string value;
  ReplicaId via = 0;              // optional serving replica override
  ReplicaId from = 0, to = 0;     // deliver: channel endpoints
  int index = 0;                  // deliver: k-th oldest in-flight on channel
};

struct Scenario {
  Topology topology;
  Mode mode = Mode::peer;
  DeliveryPolicy policy = DeliveryPolicy::random;
  std::uint64_t seed = 0;
  std::vector<Operation> ops;
};

struct TraceEvent {
  enum class Kind {
    issue,
    send,
    deliver,
    buffer,
    apply,
    client_request,
    client_serve,
    quiesce
  };
  Kind kind = Kind::issue;
  int step = 0;
  ReplicaId replica = 0;
  ClientId client = 0;
  ReplicaId peer = 0;  // send: recipient; deliver: sender
  UpdateId update;
  RegisterId reg;
  std::string value;
  bool metadata_only = false;
  std::string request;  // "read" | "write" for client events
  std::optional<EdgeTimestamp> stamp;
};

struct Trace {
  Mode mode = Mode::peer;
  std::vector<TraceEvent> events;
  bool stuck = false;
  std::vector<std::string> stuck_detail;
};

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic execution of a scenario over reliable non-FIFO channels.
/// Identical (scenario, toggle) inputs yield identical traces.
Trace run_scenario(const Scenario& scenario, const JClauseToggle& toggle = {});

/// Seed-deterministic random write workload for a topology: ops_per_replica
/// writes per replica (peer) or per client (client_server), random registers.
Scenario make_fuzz_scenario(const Topology& topology, Mode mode,
                            std::uint64_t seed, int ops_per_replica);

/// Seed-deterministic random topology: up to max_replicas replicas and
/// max_registers registers, each register placed at >= 1 replica. When
/// clients > 0 each client gets a random non-empty replica subset.
Topology make_random_topology(std::uint64_t seed, int max_replicas = 6,
                              int max_registers = 8, int clients = 0);

/// Seed-deterministic random tree topology: one unique register per edge.
Topology make_random_tree_topology(std::uint64_t seed, int max_replicas = 8);

/// Number of buffer events per trace, a proxy for delivery delay imposed by
/// metadata (used to compare dummy-enlarged topologies against the original).
int count_buffer_events(const Trace& trace);

}  // namespace causalmem
