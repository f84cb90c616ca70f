#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "causalmem/bounds.hpp"
#include "causalmem/checker.hpp"
#include "causalmem/graph_analysis.hpp"
#include "causalmem/json_io.hpp"
#include "causalmem/optimization.hpp"
#include "causalmem/simulator.hpp"
#include "causalmem/topology.hpp"

namespace {

using causalmem::Json;

std::string edge_name(causalmem::DirectedEdge e) {
  return std::to_string(e.from) + "->" + std::to_string(e.to);
}

std::map<causalmem::ReplicaId, causalmem::TimestampGraph> all_timestamp_graphs(
    const causalmem::Topology& topology, bool augmented) {
  causalmem::ShareGraph graph = causalmem::build_share_graph(topology);
  std::map<causalmem::ReplicaId, causalmem::TimestampGraph> out;
  if (augmented) {
    auto ag = causalmem::build_augmented_share_graph(topology);
    for (const auto& [i, regs] : topology.replica_registers) {
      (void)regs;
      out.emplace(i, causalmem::augmented_timestamp_graph(ag, topology, i));
    }
  } else {
    for (const auto& [i, regs] : topology.replica_registers) {
      (void)regs;
      out.emplace(i, causalmem::timestamp_graph(graph, i));
    }
  }
  return out;
}

Json analyze_report(const causalmem::Topology& topology, bool augmented) {
  causalmem::ShareGraph graph = causalmem::build_share_graph(topology);
  Json report;
  report["share_graph"] = Json::object();
  report["share_graph"]["vertices"] = graph.vertices;
  Json edges = Json::array();
  for (causalmem::DirectedEdge e : graph.edges) {
    Json entry;
    entry["edge"] = edge_name(e);
    entry["registers"] = graph.registers_on(e.from, e.to);
    edges.push_back(std::move(entry));
  }
  report["share_graph"]["edges"] = std::move(edges);
  report["augmented"] = augmented;
  Json per_replica = Json::array();
  for (const auto& [i, tsg] : all_timestamp_graphs(topology, augmented)) {
    Json entry;
    entry["replica"] = i;
    std::vector<std::string> names;
    for (causalmem::DirectedEdge e : tsg.edges) names.push_back(edge_name(e));
    entry["timestamp_edges"] = names;
    entry["size"] = tsg.edges.size();
    Json witnessed = Json::array();
    for (const auto& [e, loop] : tsg.witnesses) {
      Json w;
      w["edge"] = edge_name(e);
      std::vector<causalmem::ReplicaId> cycle{loop.pivot};
      cycle.insert(cycle.end(), loop.l_path.begin(), loop.l_path.end());
      cycle.insert(cycle.end(), loop.r_path.rbegin(), loop.r_path.rend());
      w["loop"] = cycle;
      witnessed.push_back(std::move(w));
    }
    entry["witnessed"] = std::move(witnessed);
    per_replica.push_back(std::move(entry));
  }
  report["replicas"] = std::move(per_replica);
  return report;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    causalmem::save_text(out_path, text);
  }
}

int run_fuzz_suite(const std::vector<causalmem::Topology>& topologies,
                   causalmem::Mode mode, std::uint64_t first_seed, int runs,
                   int m, bool verbose) {
  int failures = 0;
  int run_index = 0;
  for (const causalmem::Topology& topology : topologies) {
    for (int r = 0; r < runs; ++r, ++run_index) {
      std::uint64_t seed = first_seed + static_cast<std::uint64_t>(run_index);
      causalmem::Scenario scenario =
          causalmem::make_fuzz_scenario(topology, mode, seed, m);
      causalmem::Trace trace = causalmem::run_scenario(scenario);
      causalmem::Verdict verdict = causalmem::check_trace(trace, topology);
      if (!verdict.pass()) {
        ++failures;
        std::cout << "seed " << seed << ": FAIL " << verdict.summary()
                  << "\n";
      } else if (verbose) {
        std::cout << "seed " << seed << ": pass\n";
      }
    }
  }
  std::cout << (failures == 0 ? "all runs passed" : "failures detected")
            << " (" << run_index << " runs)\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partially replicated causal shared-memory toolkit"};
  app.set_version_flag("--version", "causalmem 1.0.0");
  app.require_subcommand(1);

  std::string topology_path, scenario_path, trace_path, out_path, target =
      "full";
  std::uint64_t seed = 0;
  bool client_server = false, verbose = false, force = false,
       random_topology = false;
  int m = 2, runs = 25, topo_count = 20, replica = 1, max_replicas = 6,
      max_registers = 8, clients = 0;

  auto* analyze = app.add_subcommand("analyze", "timestamp graph report");
  analyze->add_option("--topology", topology_path)->required();
  analyze->add_flag("--client-server", client_server);
  analyze->add_option("--out", out_path);

  auto* simulate = app.add_subcommand("simulate", "run a scenario");
  simulate->add_option("--topology", topology_path)->required();
  simulate->add_option("--scenario", scenario_path)->required();
  simulate->add_option("--seed", seed);
  simulate->add_option("--trace", trace_path);

  auto* check = app.add_subcommand("check", "verify a trace");
  check->add_option("--trace", trace_path)->required();
  check->add_option("--topology", topology_path)->required();
  check->add_flag("--client-server", client_server);

  auto* fuzz = app.add_subcommand("fuzz", "randomized property runs");
  fuzz->add_option("--topology", topology_path);
  fuzz->add_flag("--random", random_topology);
  fuzz->add_option("--topologies", topo_count);
  fuzz->add_option("--seed", seed);
  fuzz->add_option("--runs", runs);
  fuzz->add_option("--m", m);
  fuzz->add_flag("--client-server", client_server);
  fuzz->add_option("--max-replicas", max_replicas);
  fuzz->add_option("--max-registers", max_registers);
  fuzz->add_option("--clients", clients);
  fuzz->add_flag("--verbose", verbose);

  auto* compress = app.add_subcommand("compress", "timestamp compression");
  compress->add_option("--topology", topology_path)->required();

  auto* dummies = app.add_subcommand("dummies", "dummy register planning");
  dummies->add_option("--topology", topology_path)->required();
  dummies->add_option("--target", target)
      ->check(CLI::IsMember({"full", "selective"}));

  auto* bounds = app.add_subcommand("bounds", "coloring lower bound");
  bounds->add_option("--topology", topology_path)->required();
  bounds->add_option("--replica", replica)->required();
  bounds->add_option("--m", m);
  bounds->add_flag("--force", force);

  auto* compare = app.add_subcommand("compare", "tracking-rule comparison");
  compare->add_option("--topology", topology_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) {
      causalmem::Topology topology = causalmem::load_topology(topology_path);
      Json report = analyze_report(topology, client_server);
      write_output(out_path, report.dump(2) + "\n");
      return 0;
    }
    if (simulate->parsed()) {
      causalmem::Topology topology = causalmem::load_topology(topology_path);
      causalmem::Scenario scenario =
          causalmem::load_scenario(scenario_path, topology);
      if (simulate->count("--seed") > 0) scenario.seed = seed;
      causalmem::Trace trace = causalmem::run_scenario(scenario);
      write_output(trace_path, causalmem::trace_to_jsonl(trace));
      return trace.stuck ? 1 : 0;
    }
    if (check->parsed()) {
      causalmem::Topology topology = causalmem::load_topology(topology_path);
      causalmem::Trace trace = causalmem::load_trace(trace_path);
      if (client_server) trace.mode = causalmem::Mode::client_server;
      causalmem::Verdict verdict = causalmem::check_trace(trace, topology);
      std::cout << verdict.summary() << "\n";
      return verdict.pass() ? 0 : 1;
    }
    if (fuzz->parsed()) {
      std::vector<causalmem::Topology> topologies;
      if (!topology_path.empty()) {
        topologies.push_back(causalmem::load_topology(topology_path));
      } else if (random_topology) {
        for (int k = 0; k < topo_count; ++k) {
          topologies.push_back(causalmem::make_random_topology(
              seed * 1000 + static_cast<std::uint64_t>(k), max_replicas,
              max_registers, client_server ? std::max(clients, 1) : clients));
        }
      } else {
        throw causalmem::ParseError("fuzz needs --topology or --random");
      }
      causalmem::Mode mode = client_server ? causalmem::Mode::client_server
                                           : causalmem::Mode::peer;
      return run_fuzz_suite(topologies, mode, seed, runs, m, verbose);
    }
    if (compress->parsed()) {
      causalmem::Topology topology = causalmem::load_topology(topology_path);
      causalmem::ShareGraph graph = causalmem::build_share_graph(topology);
      Json report = Json::array();
      for (const auto& [i, tsg] : all_timestamp_graphs(topology, false)) {
        causalmem::CompressionPlan plan =
            causalmem::compression_plan(graph, tsg);
        causalmem::RegisterLevelReport regs =
            causalmem::register_level_counts(plan);
        Json entry;
        entry["replica"] = i;
        entry["full_count"] = plan.full_count;
        entry["compressed_count"] = plan.compressed_count;
        entry["register_count"] = regs.register_total;
        report.push_back(std::move(entry));
      }
      std::cout << report.dump(2) << "\n";
      return 0;
    }
    if (dummies->parsed()) {
      causalmem::Topology topology = causalmem::load_topology(topology_path);
      causalmem::DummyTarget t = target == "full"
                                     ? causalmem::DummyTarget::full_emulation
                                     : causalmem::DummyTarget::neighbors_and_loops;
      auto plan = causalmem::dummy_plan(topology, t);
      causalmem::Topology enlarged = causalmem::apply_dummies(topology, plan);
      Json report;
      Json entries = Json::array();
      for (const auto& [i, reg] : plan) {
        entries.push_back(Json{{"replica", i}, {"register", reg}});
      }
      report["plan"] = std::move(entries);
      Json sizes = Json::array();
      auto before = all_timestamp_graphs(topology, false);
      auto after = all_timestamp_graphs(enlarged, false);
      for (const auto& [i, tsg] : before) {
        sizes.push_back(Json{{"replica", i},
                             {"before", tsg.edges.size()},
                             {"after", after.at(i).edges.size()}});
      }
      report["sizes"] = std::move(sizes);
      std::cout << report.dump(2) << "\n";
      return 0;
    }
    if (bounds->parsed()) {
      causalmem::Topology topology = causalmem::load_topology(topology_path);
      causalmem::BoundReport report =
          causalmem::bound_report(topology, replica, m, force);
      std::cout << "pasts=" << report.past_count
                << " chromatic=" << report.chromatic
                << " realized=" << report.realized_timestamps
                << " constraint=" << (report.constraint_ok ? "pass" : "fail")
                << " inequality=" << (report.inequality_ok ? "pass" : "fail")
                << "\n";
      return report.constraint_ok && report.inequality_ok ? 0 : 1;
    }
    if (compare->parsed()) {
      causalmem::Topology topology = causalmem::load_topology(topology_path);
      causalmem::ShareGraph graph = causalmem::build_share_graph(topology);
      causalmem::ComparisonReport report =
          causalmem::compare_conditions(graph);
      Json rows = Json::array();
      for (const causalmem::ComparisonRow& row : report.rows) {
        Json entry;
        entry["replica"] = row.replica;
        entry["edge"] = edge_name(row.edge);
        entry["timestamp_graph"] = row.timestamp_graph_rule;
        entry["hoop_rule"] = row.hoop_rule;
        entry["modified_hoop_rule"] = row.modified_hoop_rule;
        entry["disagreement"] = row.disagreement();
        rows.push_back(std::move(entry));
      }
      std::cout << rows.dump(2) << "\n";
      return 0;
    }
  } catch (const causalmem::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
