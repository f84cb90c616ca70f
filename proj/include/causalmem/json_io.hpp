#pragma once

#include <json.hpp>
#include <string>

#include "causalmem/simulator.hpp"
#include "causalmem/topology.hpp"

namespace causalmem {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

Topology topology_from_json(const Json& j);
Json topology_to_json(const Topology& topology);
Topology load_topology(const std::string& path);

/// Scenario files carry mode, policy, seed and the operation list; the
/// topology is supplied separately.
Scenario scenario_from_json(const Json& j, const Topology& topology);
Scenario load_scenario(const std::string& path, const Topology& topology);

Json event_to_json(const TraceEvent& ev);
TraceEvent event_from_json(const Json& j);

/// JSON Lines: one event per line, stable field order, trailer line with
/// mode and stuck status.
std::string trace_to_jsonl(const Trace& trace);
Trace trace_from_jsonl(const std::string& text);
void save_trace(const std::string& path, const Trace& trace);
Trace load_trace(const std::string& path);

Json load_json(const std::string& path);
void save_text(const std::string& path, const std::string& text);

}  // namespace causalmem
