#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "causalmem/json_io.hpp"
#include "causalmem/simulator.hpp"

using namespace causalmem;

namespace {

Topology chain3() {
  Topology t;
  t.replica_registers[1] = {"d", "a"};
  t.replica_registers[2] = {"a", "b"};
  t.replica_registers[3] = {"b", "c"};
  return t;
}

}  // namespace

TEST_CASE("topologies round trip through json") {
  Topology t = chain3();
  t.client_replicas[1] = {1, 3};
  t.replica_registers[3].insert("a");
  t.dummy_marks.insert({3, "a"});
  Topology back = topology_from_json(topology_to_json(t));
  CHECK(back.replica_registers == t.replica_registers);
  CHECK(back.client_replicas == t.client_replicas);
  CHECK(back.dummy_marks == t.dummy_marks);
}

TEST_CASE("topology parsing rejects malformed input") {
  CHECK_THROWS_AS(topology_from_json(Json::object()), ParseError);
  CHECK_THROWS_AS(topology_from_json(Json::parse(R"({
    "replicas": [{"id": 1, "registers": ["x"]},
                 {"id": 1, "registers": ["y"]}]})")),
                  ParseError);
  CHECK_THROWS_AS(topology_from_json(Json::parse(R"({
    "replicas": [{"id": 1, "registers": ["x", "x"]}]})")),
                  ParseError);
  CHECK_THROWS_AS(topology_from_json(Json::parse(R"({
    "replicas": [{"id": 1, "registers": ["x"]}],
    "clients": [{"id": 1, "replicas": [1, 9]}]})")),
                  ParseError);
  CHECK_THROWS_AS(topology_from_json(Json::parse(R"({
    "replicas": [{"id": 1, "registers": ["x"]}],
    "clients": [{"id": 1, "replicas": [1, 1]}]})")),
                  ParseError);
  // Structural validation still runs: dummy of an unstored register.
  CHECK_THROWS_AS(topology_from_json(Json::parse(R"({
    "replicas": [{"id": 1, "registers": ["x"]}],
    "dummies": [{"replica": 1, "register": "y"}]})")),
                  DummyConflict);
}

TEST_CASE("scenarios parse ops with their per-kind fields") {
  Topology t = chain3();
  t.client_replicas[4] = {2};
  Scenario s = scenario_from_json(Json::parse(R"({
    "mode": "client_server",
    "policy": "script",
    "seed": 7,
    "ops": [
      {"op": "client_write", "client": 4, "register": "a", "value": "v",
       "via": 2},
      {"op": "client_read", "client": 4, "register": "b"},
      {"op": "deliver", "from": 2, "to": 1, "index": 1},
      {"op": "deliver_all"}
    ]})"),
                                    t);
  CHECK(s.mode == Mode::client_server);
  CHECK(s.policy == DeliveryPolicy::script);
  CHECK(s.seed == 7);
  REQUIRE(s.ops.size() == 4);
  CHECK(s.ops[0].kind == Operation::Kind::client_write);
  CHECK(s.ops[0].via == 2);
  CHECK(s.ops[1].kind == Operation::Kind::client_read);
  CHECK(s.ops[2].kind == Operation::Kind::deliver);
  CHECK(s.ops[2].from == 2);
  CHECK(s.ops[2].index == 1);
  CHECK(s.ops[3].kind == Operation::Kind::deliver_all);
}

TEST_CASE("scenario parsing rejects inconsistent references") {
  Topology t = chain3();
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({
    "ops": [{"op": "write", "replica": 1, "register": "c", "value": "v"}]})"),
                                     t),
                  ParseError);
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({
    "ops": [{"op": "client_write", "client": 9, "register": "a",
             "value": "v"}]})"),
                                     t),
                  ParseError);
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({
    "ops": [{"op": "deliver", "from": 1, "to": 9}]})"),
                                     t),
                  ParseError);
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"mode": "x"})"), t),
                  ParseError);
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"policy": "x"})"), t),
                  ParseError);
  CHECK_THROWS_AS(
      scenario_from_json(Json::parse(R"({"ops": [{"op": "x"}]})"), t),
      ParseError);
}

TEST_CASE("events round trip through json for every kind") {
  Trace trace = run_scenario(make_fuzz_scenario(chain3(), Mode::peer, 3, 4));
  for (const TraceEvent& ev : trace.events) {
    TraceEvent back = event_from_json(event_to_json(ev));
    CHECK(back.step == ev.step);
    CHECK(back.kind == ev.kind);
    CHECK(back.replica == ev.replica);
    CHECK(back.update == ev.update);
    CHECK(back.stamp == ev.stamp);
  }
}

TEST_CASE("traces round trip through json lines with the trailer") {
  Topology t = chain3();
  t.client_replicas[1] = {1, 2};
  Trace trace =
      run_scenario(make_fuzz_scenario(t, Mode::client_server, 5, 3));
  std::string text = trace_to_jsonl(trace);
  Trace back = trace_from_jsonl(text);
  CHECK(back.mode == trace.mode);
  CHECK(back.stuck == trace.stuck);
  CHECK(back.events.size() == trace.events.size());
  CHECK(trace_to_jsonl(back) == text);
}

TEST_CASE("trace parsing requires the trailer and valid lines") {
  CHECK_THROWS_AS(trace_from_jsonl(""), ParseError);
  CHECK_THROWS_AS(trace_from_jsonl(R"({"step":0,"kind":"quiesce"})"),
                  ParseError);  // events only, no trailer
  CHECK_THROWS_AS(trace_from_jsonl("not json\n"), ParseError);
  CHECK_THROWS_AS(
      trace_from_jsonl(
          "{\"step\":0,\"kind\":\"nope\"}\n"
          "{\"trace\":{\"mode\":\"peer\",\"stuck\":false,"
          "\"stuck_detail\":[]}}\n"),
      ParseError);
  Trace minimal = trace_from_jsonl(
      "{\"trace\":{\"mode\":\"client_server\",\"stuck\":true,"
      "\"stuck_detail\":[\"w\"]}}\n");
  CHECK(minimal.mode == Mode::client_server);
  CHECK(minimal.stuck);
  CHECK(minimal.stuck_detail == std::vector<std::string>{"w"});
}

TEST_CASE("file save and load round trip") {
  std::string path = "/tmp/causalmem_test_trace.jsonl";
  Trace trace = run_scenario(make_fuzz_scenario(chain3(), Mode::peer, 9, 2));
  save_trace(path, trace);
  Trace back = load_trace(path);
  CHECK(trace_to_jsonl(back) == trace_to_jsonl(trace));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_trace(path), ParseError);
  CHECK_THROWS_AS(load_json("/nonexistent/nope.json"), ParseError);
}
