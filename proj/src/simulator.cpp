#include "causalmem/simulator.hpp"

#include <algorithm>

#include "causalmem/graph_analysis.hpp"

namespace causalmem {

namespace {

struct Engine {
  const Scenario& scenario;
  const JClauseToggle& toggle;
  ShareGraph graph;
  std::map<ReplicaId, ReplicaState> replicas;
  std::map<ClientId, ClientState> clients;
  std::map<DirectedEdge, std::vector<UpdateMessage>> channels;
  std::mt19937_64 rng;
  Trace trace;
  int step = 0;

  Engine(const Scenario& s, const JClauseToggle& t)
      : scenario(s), toggle(t), rng(s.seed) {
    s.topology.validate();
    graph = build_share_graph(s.topology);
    if (s.mode == Mode::peer) {
      for (const auto& [i, regs] : s.topology.replica_registers) {
        (void)regs;
        replicas.emplace(i, make_replica(s.topology, timestamp_graph(graph, i), i));
      }
    } else {
      auto ag = build_augmented_share_graph(s.topology);
      std::map<ReplicaId, TimestampGraph> augmented;
      for (const auto& [i, regs] : s.topology.replica_registers) {
        (void)regs;
        augmented.emplace(i, augmented_timestamp_graph(ag, s.topology, i));
      }
      for (const auto& [i, tsg] : augmented) {
        replicas.emplace(i, make_replica(s.topology, tsg, i));
      }
      for (const auto& [c, rs] : s.topology.client_replicas) {
        (void)rs;
        clients.emplace(c, make_client(s.topology, augmented, c));
      }
    }
    trace.mode = s.mode;
  }

  TraceEvent& emit(TraceEvent::Kind kind) {
    TraceEvent ev;
    ev.kind = kind;
    ev.step = step++;
    trace.events.push_back(std::move(ev));
    return trace.events.back();
  }

  void record_issue(ReplicaId i, const WriteResult& result, const RegisterId& x,
                    const std::string& value) {
    auto& ev = emit(TraceEvent::Kind::issue);
    ev.replica = i;
    ev.update = result.id;
    ev.reg = x;
    ev.value = value;
    ev.stamp = result.stamp;
    for (const auto& [k, msg] : result.messages) {
      auto& send = emit(TraceEvent::Kind::send);
      send.replica = i;
      send.peer = k;
      send.update = msg.id;
      send.reg = x;
      send.metadata_only = msg.metadata_only;
      channels[{i, k}].push_back(msg);
    }
  }

  /// Removes channel[index] and hands it to the recipient, logging the
  /// delivery and every application it triggers.
  void deliver(DirectedEdge channel, std::size_t index) {
    auto it = channels.find(channel);
    if (it == channels.end() || index >= it->second.size()) {
      throw ScenarioError("no in-flight message at (" +
                          std::to_string(channel.from) + "," +
                          std::to_string(channel.to) + ")[" +
                          std::to_string(index) + "]");
    }
    UpdateMessage msg = it->second[index];
    it->second.erase(it->second.begin() + static_cast<std::ptrdiff_t>(index));
    if (it->second.empty()) channels.erase(it);

    auto& ev = emit(TraceEvent::Kind::deliver);
    ev.replica = channel.to;
    ev.peer = channel.from;
    ev.update = msg.id;
    ev.reg = msg.reg;
    ev.metadata_only = msg.metadata_only;
    ev.stamp = msg.timestamp;

    ReceiveOutcome outcome = receive_update(replicas.at(channel.to), msg, toggle);
    if (outcome.buffered) {
      auto& buf = emit(TraceEvent::Kind::buffer);
      buf.replica = channel.to;
      buf.update = msg.id;
      buf.reg = msg.reg;
    }
    for (std::size_t a = 0; a < outcome.applied.size(); ++a) {
      auto& app = emit(TraceEvent::Kind::apply);
      app.replica = channel.to;
      app.update = outcome.applied[a];
      app.stamp = outcome.tau_after[a];
    }
  }

  std::vector<DirectedEdge> nonempty_channels() const {
    std::vector<DirectedEdge> keys;
    for (const auto& [e, msgs] : channels) {
      if (!msgs.empty()) keys.push_back(e);
    }
    return keys;
  }

  /// Delivers in-flight messages bound for replica i, oldest first, until the
  /// client predicate admits the request. False when the channels run dry.
  bool make_servable(ReplicaId i, const ClientState& client) {
    while (!predicate_j1_j2(replicas.at(i).tau, i, client.mu)) {
      bool delivered = false;
      for (DirectedEdge e : nonempty_channels()) {
        if (e.to != i) continue;
        deliver(e, 0);
        delivered = true;
        break;
      }
      if (!delivered) return false;
    }
    return true;
  }

  ReplicaState& replica_for(const Operation& op) {
    auto it = replicas.find(op.replica);
    if (it == replicas.end()) {
      throw ScenarioError("unknown replica " + std::to_string(op.replica));
    }
    return it->second;
  }

  ClientState& client_for(const Operation& op) {
    auto it = clients.find(op.client);
    if (it == clients.end()) {
      throw ScenarioError("unknown client " + std::to_string(op.client));
    }
    return it->second;
  }

  void run_op(const Operation& op) {
    switch (op.kind) {
      case Operation::Kind::write: {
        if (scenario.mode != Mode::peer) {
          throw ScenarioError("replica write outside peer mode");
        }
        WriteResult result = handle_write(replica_for(op), scenario.topology,
                                          graph, op.reg, op.value);
        record_issue(op.replica, result, op.reg, op.value);
        break;
      }
      case Operation::Kind::read: {
        if (scenario.mode != Mode::peer) {
          throw ScenarioError("replica read outside peer mode");
        }
        std::string value = handle_read(replica_for(op), op.reg);
        auto& ev = emit(TraceEvent::Kind::client_request);
        ev.replica = op.replica;
        ev.reg = op.reg;
        ev.value = value;
        ev.request = "read";
        break;
      }
      case Operation::Kind::client_write:
      case Operation::Kind::client_read: {
        if (scenario.mode != Mode::client_server) {
          throw ScenarioError("client operation outside client-server mode");
        }
        ClientState& client = client_for(op);
        bool is_write = op.kind == Operation::Kind::client_write;
        ReplicaId serving =
            select_serving_replica(scenario.topology, client, op.reg, op.via);
        auto& req = emit(TraceEvent::Kind::client_request);
        req.client = client.id;
        req.replica = serving;
        req.reg = op.reg;
        req.request = is_write ? "write" : "read";
        if (is_write) req.value = op.value;

        if (!make_servable(serving, client)) {
          trace.stuck = true;
          trace.stuck_detail.push_back(
              "client " + std::to_string(client.id) + " request on " + op.reg +
              " not servable at replica " + std::to_string(serving));
          return;
        }
        ReplicaState& rep = replicas.at(serving);
        UpdateId issued_id;
        std::string served_value;
        if (is_write) {
          EdgeTimestamp stamped = cs_advance(rep, graph, client.mu, op.reg);
          rep.store[op.reg] = op.value;
          rep.tau = stamped;
          WriteResult result;
          result.id = UpdateId{rep.id, rep.next_seq++};
          result.stamp = stamped;
          rep.applied_log.push_back(result.id);
          for (ReplicaId k : scenario.topology.holders(op.reg)) {
            if (k == rep.id) continue;
            UpdateMessage msg;
            msg.id = result.id;
            msg.timestamp = stamped;
            msg.reg = op.reg;
            msg.metadata_only = scenario.topology.is_dummy(k, op.reg);
            if (!msg.metadata_only) msg.value = op.value;
            result.messages.emplace_back(k, std::move(msg));
          }
          issued_id = result.id;
          served_value = op.value;
          record_issue(rep.id, result, op.reg, op.value);
        } else {
          served_value = handle_read(rep, op.reg);
        }
        client.mu = client_merge(client, serving, rep.tau);
        auto& ev = emit(TraceEvent::Kind::client_serve);
        ev.client = client.id;
        ev.replica = serving;
        ev.reg = op.reg;
        ev.request = is_write ? "write" : "read";
        ev.update = issued_id;
        ev.value = served_value;
        ev.stamp = client.mu;
        break;
      }
      case Operation::Kind::deliver: {
        if (scenario.policy != DeliveryPolicy::script) {
          throw ScenarioError("explicit deliver under random policy");
        }
        deliver({op.from, op.to}, static_cast<std::size_t>(op.index));
        break;
      }
      case Operation::Kind::deliver_all: {
        if (scenario.policy != DeliveryPolicy::script) {
          throw ScenarioError("explicit deliver under random policy");
        }
        drain_deterministic();
        break;
      }
    }
  }

  void drain_deterministic() {
    auto keys = nonempty_channels();
    while (!keys.empty()) {
      deliver(keys.front(), 0);
      keys = nonempty_channels();
    }
  }

  void drain_random() {
    auto keys = nonempty_channels();
    while (!keys.empty()) {
      DirectedEdge e = keys[rng() % keys.size()];
      std::size_t index = rng() % channels.at(e).size();
      deliver(e, index);
      keys = nonempty_channels();
    }
  }

  Trace run() {
    for (const Operation& op : scenario.ops) {
      run_op(op);
      if (trace.stuck) break;
      if (scenario.policy == DeliveryPolicy::random &&
          op.kind != Operation::Kind::read) {
        // Occasionally deliver something mid-scenario to vary interleavings.
        auto keys = nonempty_channels();
        if (!keys.empty() && rng() % 2 == 0) {
          DirectedEdge e = keys[rng() % keys.size()];
          deliver(e, rng() % channels.at(e).size());
        }
      }
    }
    emit(TraceEvent::Kind::quiesce);
    if (!trace.stuck) {
      if (scenario.policy == DeliveryPolicy::random) {
        drain_random();
      } else {
        drain_deterministic();
      }
    }
    for (const auto& [i, rep] : replicas) {
      for (const auto& msg : rep.pending) {
        trace.stuck = true;
        trace.stuck_detail.push_back(
            "replica " + std::to_string(i) + " never applied update (" +
            std::to_string(msg.id.issuer) + "," + std::to_string(msg.id.seq) +
            ")");
      }
    }
    return std::move(trace);
  }
};

}  // namespace

Trace run_scenario(const Scenario& scenario, const JClauseToggle& toggle) {
  Engine engine(scenario, toggle);
  return engine.run();
}

Scenario make_fuzz_scenario(const Topology& topology, Mode mode,
                            std::uint64_t seed, int ops_per_replica) {
  topology.validate();
  Scenario s;
  s.topology = topology;
  s.mode = mode;
  s.policy = DeliveryPolicy::random;
  s.seed = seed;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  int counter = 0;
  auto pick = [&rng](const std::vector<RegisterId>& regs) {
    return regs[rng() % regs.size()];
  };
  for (int round = 0; round < ops_per_replica; ++round) {
    if (mode == Mode::peer) {
      for (const auto& [i, all] : topology.replica_registers) {
        (void)all;
        RegisterSet real = topology.real_registers_of(i);
        if (real.empty()) continue;
        std::vector<RegisterId> regs(real.begin(), real.end());
        Operation op;
        op.kind = Operation::Kind::write;
        op.replica = i;
        op.reg = pick(regs);
        op.value = "v" + std::to_string(counter++);
        s.ops.push_back(std::move(op));
      }
    } else {
      for (const auto& [c, rs] : topology.client_replicas) {
        std::set<RegisterId> reachable;
        for (ReplicaId r : rs) {
          RegisterSet real = topology.real_registers_of(r);
          reachable.insert(real.begin(), real.end());
        }
        if (reachable.empty()) continue;
        std::vector<RegisterId> regs(reachable.begin(), reachable.end());
        Operation op;
        op.kind = rng() % 4 == 0 ? Operation::Kind::client_read
                                 : Operation::Kind::client_write;
        op.client = c;
        op.reg = pick(regs);
        if (op.kind == Operation::Kind::client_write) {
          op.value = "v" + std::to_string(counter++);
        }
        s.ops.push_back(std::move(op));
      }
    }
  }
  return s;
}

Topology make_random_topology(std::uint64_t seed, int max_replicas,
                              int max_registers, int clients) {
  std::mt19937_64 rng(seed);
  int n = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                   std::max(1, max_replicas - 1)));
  int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_registers));
  Topology t;
  for (ReplicaId i = 1; i <= n; ++i) t.replica_registers[i] = {};
  for (int r = 0; r < m; ++r) {
    RegisterId x = "r" + std::to_string(r);
    int copies = 1 + static_cast<int>(rng() % 3);
    std::set<ReplicaId> where;
    while (static_cast<int>(where.size()) < std::min(copies, n)) {
      where.insert(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n)));
    }
    for (ReplicaId i : where) t.replica_registers[i].insert(x);
  }
  // Every replica must store something; give stragglers a private register.
  for (ReplicaId i = 1; i <= n; ++i) {
    if (t.replica_registers[i].empty()) {
      t.replica_registers[i].insert("own" + std::to_string(i));
    }
  }
  for (ClientId c = 1; c <= clients; ++c) {
    int size = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    std::set<ReplicaId> rs;
    while (static_cast<int>(rs.size()) < size) {
      rs.insert(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n)));
    }
    t.client_replicas[c] = std::move(rs);
  }
  t.validate();
  return t;
}

Topology make_random_tree_topology(std::uint64_t seed, int max_replicas) {
  std::mt19937_64 rng(seed);
  int n = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                   std::max(1, max_replicas - 1)));
  Topology t;
  t.replica_registers[1].insert("root");
  for (ReplicaId i = 2; i <= n; ++i) {
    ReplicaId parent =
        1 + static_cast<int>(rng() % static_cast<std::uint64_t>(i - 1));
    RegisterId x = "p" + std::to_string(i);
    t.replica_registers[parent].insert(x);
    t.replica_registers[i].insert(x);
  }
  t.validate();
  return t;
}

int count_buffer_events(const Trace& trace) {
  return static_cast<int>(
      std::count_if(trace.events.begin(), trace.events.end(),
                    [](const TraceEvent& ev) {
                      return ev.kind == TraceEvent::Kind::buffer;
                    }));
}

}  // namespace causalmem
