#include "causalmem/json_io.hpp"

#include <fstream>
#include <sstream>

namespace causalmem {

namespace {

std::string edge_key(DirectedEdge e) {
  return std::to_string(e.from) + "->" + std::to_string(e.to);
}

DirectedEdge parse_edge_key(const std::string& key) {
  auto pos = key.find("->");
  if (pos == std::string::npos) {
    throw ParseError("bad edge key '" + key + "'");
  }
  return {std::stoi(key.substr(0, pos)), std::stoi(key.substr(pos + 2))};
}

Json stamp_to_json(const EdgeTimestamp& t) {
  Json out = Json::object();
  for (const auto& [e, c] : t.counters) out[edge_key(e)] = c;
  return out;
}

EdgeTimestamp stamp_from_json(const Json& j) {
  EdgeTimestamp t;
  for (const auto& [key, value] : j.items()) {
    t.counters[parse_edge_key(key)] = value.get<std::int64_t>();
  }
  return t;
}

Json update_to_json(UpdateId u) {
  return Json{{"issuer", u.issuer}, {"seq", u.seq}};
}

UpdateId update_from_json(const Json& j) {
  return {j.at("issuer").get<int>(), j.at("seq").get<std::int64_t>()};
}

const char* kind_name(TraceEvent::Kind kind) {
  switch (kind) {
    case TraceEvent::Kind::issue: return "issue";
    case TraceEvent::Kind::send: return "send";
    case TraceEvent::Kind::deliver: return "deliver";
    case TraceEvent::Kind::buffer: return "buffer";
    case TraceEvent::Kind::apply: return "apply";
    case TraceEvent::Kind::client_request: return "client_request";
    case TraceEvent::Kind::client_serve: return "client_serve";
    case TraceEvent::Kind::quiesce: return "quiesce";
  }
  return "unknown";
}

TraceEvent::Kind kind_from_name(const std::string& name) {
  if (name == "issue") return TraceEvent::Kind::issue;
  if (name == "send") return TraceEvent::Kind::send;
  if (name == "deliver") return TraceEvent::Kind::deliver;
  if (name == "buffer") return TraceEvent::Kind::buffer;
  if (name == "apply") return TraceEvent::Kind::apply;
  if (name == "client_request") return TraceEvent::Kind::client_request;
  if (name == "client_serve") return TraceEvent::Kind::client_serve;
  if (name == "quiesce") return TraceEvent::Kind::quiesce;
  throw ParseError("unknown event kind '" + name + "'");
}

}  // namespace

Topology topology_from_json(const Json& j) {
  Topology t;
  if (!j.contains("replicas")) throw ParseError("topology lacks 'replicas'");
  for (const Json& entry : j.at("replicas")) {
    ReplicaId id = entry.at("id").get<int>();
    if (t.replica_registers.count(id) != 0) {
      throw ParseError("duplicate replica id " + std::to_string(id));
    }
    RegisterSet regs;
    for (const Json& r : entry.at("registers")) {
      if (!regs.insert(r.get<std::string>()).second) {
        throw ParseError("duplicate register '" + r.get<std::string>() +
                         "' at replica " + std::to_string(id));
      }
    }
    t.replica_registers[id] = std::move(regs);
  }
  if (j.contains("clients")) {
    for (const Json& entry : j.at("clients")) {
      ClientId id = entry.at("id").get<int>();
      if (t.client_replicas.count(id) != 0) {
        throw ParseError("duplicate client id " + std::to_string(id));
      }
      std::set<ReplicaId> rs;
      for (const Json& r : entry.at("replicas")) {
        ReplicaId rid = r.get<int>();
        if (t.replica_registers.count(rid) == 0) {
          throw ParseError("client " + std::to_string(id) +
                           " references unknown replica " +
                           std::to_string(rid));
        }
        if (!rs.insert(rid).second) {
          throw ParseError("client " + std::to_string(id) +
                           " lists replica " + std::to_string(rid) +
                           " twice");
        }
      }
      t.client_replicas[id] = std::move(rs);
    }
  }
  if (j.contains("dummies")) {
    for (const Json& entry : j.at("dummies")) {
      t.dummy_marks.insert({entry.at("replica").get<int>(),
                            entry.at("register").get<std::string>()});
    }
  }
  t.validate();
  return t;
}

Json topology_to_json(const Topology& topology) {
  Json j;
  Json replicas = Json::array();
  for (const auto& [id, regs] : topology.replica_registers) {
    Json entry;
    entry["id"] = id;
    entry["registers"] = regs;
    replicas.push_back(std::move(entry));
  }
  j["replicas"] = std::move(replicas);
  if (!topology.client_replicas.empty()) {
    Json clients = Json::array();
    for (const auto& [id, rs] : topology.client_replicas) {
      Json entry;
      entry["id"] = id;
      entry["replicas"] = rs;
      clients.push_back(std::move(entry));
    }
    j["clients"] = std::move(clients);
  }
  if (!topology.dummy_marks.empty()) {
    Json dummies = Json::array();
    for (const auto& [replica, reg] : topology.dummy_marks) {
      dummies.push_back(Json{{"replica", replica}, {"register", reg}});
    }
    j["dummies"] = std::move(dummies);
  }
  return j;
}

Topology load_topology(const std::string& path) {
  return topology_from_json(load_json(path));
}

Scenario scenario_from_json(const Json& j, const Topology& topology) {
  Scenario s;
  s.topology = topology;
  if (j.contains("mode")) {
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "peer") {
      s.mode = Mode::peer;
    } else if (mode == "client_server") {
      s.mode = Mode::client_server;
    } else {
      throw ParseError("unknown mode '" + mode + "'");
    }
  }
  if (j.contains("policy")) {
    std::string policy = j.at("policy").get<std::string>();
    if (policy == "random") {
      s.policy = DeliveryPolicy::random;
    } else if (policy == "script") {
      s.policy = DeliveryPolicy::script;
    } else {
      throw ParseError("unknown policy '" + policy + "'");
    }
  }
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  for (const Json& entry : j.value("ops", Json::array())) {
    Operation op;
    std::string name = entry.at("op").get<std::string>();
    if (name == "write" || name == "read") {
      op.kind = name == "write" ? Operation::Kind::write
                                : Operation::Kind::read;
      op.replica = entry.at("replica").get<int>();
      op.reg = entry.at("register").get<std::string>();
      if (name == "write") op.value = entry.at("value").get<std::string>();
      if (!topology.stores(op.replica, op.reg)) {
        throw ParseError("replica " + std::to_string(op.replica) +
                         " does not store '" + op.reg + "'");
      }
    } else if (name == "client_write" || name == "client_read") {
      op.kind = name == "client_write" ? Operation::Kind::client_write
                                       : Operation::Kind::client_read;
      op.client = entry.at("client").get<int>();
      op.reg = entry.at("register").get<std::string>();
      if (name == "client_write") {
        op.value = entry.at("value").get<std::string>();
      }
      op.via = entry.value("via", 0);
      if (topology.client_replicas.count(op.client) == 0) {
        throw ParseError("unknown client " + std::to_string(op.client));
      }
    } else if (name == "deliver") {
      op.kind = Operation::Kind::deliver;
      op.from = entry.at("from").get<int>();
      op.to = entry.at("to").get<int>();
      op.index = entry.value("index", 0);
      if (!topology.has_replica(op.from) || !topology.has_replica(op.to)) {
        throw ParseError("deliver references unknown replica");
      }
    } else if (name == "deliver_all") {
      op.kind = Operation::Kind::deliver_all;
    } else {
      throw ParseError("unknown op '" + name + "'");
    }
    s.ops.push_back(std::move(op));
  }
  return s;
}

Scenario load_scenario(const std::string& path, const Topology& topology) {
  return scenario_from_json(load_json(path), topology);
}

Json event_to_json(const TraceEvent& ev) {
  Json j;
  j["step"] = ev.step;
  j["kind"] = kind_name(ev.kind);
  switch (ev.kind) {
    case TraceEvent::Kind::issue:
      j["replica"] = ev.replica;
      j["update"] = update_to_json(ev.update);
      j["register"] = ev.reg;
      j["value"] = ev.value;
      break;
    case TraceEvent::Kind::send:
      j["replica"] = ev.replica;
      j["to"] = ev.peer;
      j["update"] = update_to_json(ev.update);
      j["register"] = ev.reg;
      j["metadata_only"] = ev.metadata_only;
      break;
    case TraceEvent::Kind::deliver:
      j["replica"] = ev.replica;
      j["from"] = ev.peer;
      j["update"] = update_to_json(ev.update);
      j["register"] = ev.reg;
      j["metadata_only"] = ev.metadata_only;
      break;
    case TraceEvent::Kind::buffer:
      j["replica"] = ev.replica;
      j["update"] = update_to_json(ev.update);
      j["register"] = ev.reg;
      break;
    case TraceEvent::Kind::apply:
      j["replica"] = ev.replica;
      j["update"] = update_to_json(ev.update);
      break;
    case TraceEvent::Kind::client_request:
      j["client"] = ev.client;
      j["replica"] = ev.replica;
      j["register"] = ev.reg;
      j["request"] = ev.request;
      if (!ev.value.empty()) j["value"] = ev.value;
      break;
    case TraceEvent::Kind::client_serve:
      j["client"] = ev.client;
      j["replica"] = ev.replica;
      j["register"] = ev.reg;
      j["request"] = ev.request;
      if (ev.request == "write") j["update"] = update_to_json(ev.update);
      j["value"] = ev.value;
      break;
    case TraceEvent::Kind::quiesce:
      break;
  }
  if (ev.stamp) j["stamp"] = stamp_to_json(*ev.stamp);
  return j;
}

TraceEvent event_from_json(const Json& j) {
  TraceEvent ev;
  ev.step = j.at("step").get<int>();
  ev.kind = kind_from_name(j.at("kind").get<std::string>());
  ev.replica = j.value("replica", 0);
  ev.client = j.value("client", 0);
  if (j.contains("to")) ev.peer = j.at("to").get<int>();
  if (j.contains("from")) ev.peer = j.at("from").get<int>();
  if (j.contains("update")) ev.update = update_from_json(j.at("update"));
  ev.reg = j.value("register", std::string{});
  ev.value = j.value("value", std::string{});
  ev.metadata_only = j.value("metadata_only", false);
  ev.request = j.value("request", std::string{});
  if (j.contains("stamp")) ev.stamp = stamp_from_json(j.at("stamp"));
  return ev;
}

std::string trace_to_jsonl(const Trace& trace) {
  std::ostringstream out;
  for (const TraceEvent& ev : trace.events) {
    out << event_to_json(ev).dump() << '\n';
  }
  Json trailer;
  trailer["trace"] = Json{
      {"mode", trace.mode == Mode::peer ? "peer" : "client_server"},
      {"stuck", trace.stuck},
      {"stuck_detail", trace.stuck_detail}};
  out << trailer.dump() << '\n';
  return out.str();
}

Trace trace_from_jsonl(const std::string& text) {
  Trace trace;
  bool saw_trailer = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string{"bad trace line: "} + e.what());
    }
    if (j.contains("trace")) {
      const Json& t = j.at("trace");
      trace.mode = t.at("mode").get<std::string>() == "client_server"
                       ? Mode::client_server
                       : Mode::peer;
      trace.stuck = t.at("stuck").get<bool>();
      for (const Json& d : t.at("stuck_detail")) {
        trace.stuck_detail.push_back(d.get<std::string>());
      }
      saw_trailer = true;
    } else {
      trace.events.push_back(event_from_json(j));
    }
  }
  if (!saw_trailer) throw ParseError("trace file lacks a trailer line");
  return trace;
}

void save_trace(const std::string& path, const Trace& trace) {
  save_text(path, trace_to_jsonl(trace));
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return trace_from_jsonl(buffer.str());
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("cannot parse '" + path + "': " + e.what());
  }
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << text;
}

}  // namespace causalmem
