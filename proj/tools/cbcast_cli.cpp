// Command-line front end: deterministic simulation, trace checking, the
// replicated KV node, and the scripted golden scenarios.
//
// Exit codes are a contract: 0 clean, 1 usage or I/O error, 2 a causal
// delivery property was violated.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cbcast/kvs/service.hpp"
#include "cbcast/simulator.hpp"
#include "cbcast/trace.hpp"

namespace {

using cbcast::Json;

constexpr int kExitClean = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  Json cfg = Json::parse(in, nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) {
    throw std::runtime_error("config file is not a JSON object: " + path);
  }
  return cfg;
}

// Flags beat the config file; the config file beats defaults.
template <typename T>
void overlay(const CLI::App& app, const std::string& flag, const Json& cfg,
             const char* key, T& value) {
  if (app.count(flag) == 0 && cfg.contains(key)) {
    value = cfg.at(key).get<T>();
  }
}

int run_simulate(const CLI::App& cmd, cbcast::SimConfig sim_cfg,
                 const std::string& config_path,
                 const std::string& trace_path) {
  if (!config_path.empty()) {
    const Json cfg = load_config_file(config_path);
    overlay(cmd, "--procs", cfg, "procs", sim_cfg.n_procs);
    overlay(cmd, "--seed", cfg, "seed", sim_cfg.seed);
    overlay(cmd, "--steps", cfg, "steps", sim_cfg.max_steps);
    overlay(cmd, "--p-drop", cfg, "p_drop", sim_cfg.p_drop);
    overlay(cmd, "--p-duplicate", cfg, "p_duplicate", sim_cfg.p_duplicate);
    overlay(cmd, "--broadcast-weight", cfg, "broadcast_weight",
            sim_cfg.broadcast_weight);
    overlay(cmd, "--receive-weight", cfg, "receive_weight",
            sim_cfg.receive_weight);
    overlay(cmd, "--deliver-weight", cfg, "deliver_weight",
            sim_cfg.deliver_weight);
  }
  sim_cfg.validate();

  cbcast::Simulation sim(sim_cfg);
  sim.run();

  const auto violations = cbcast::check_all(sim.execution());
  for (const auto& v : violations) {
    std::cerr << cbcast::violation_to_json(v).dump() << "\n";
  }

  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) {
      std::cerr << "cannot open trace file for writing: " << trace_path
                << "\n";
      return kExitUsage;
    }
    out << cbcast::trace_to_jsonl(sim.trace());
  }

  Json summary = sim.stats().to_json();
  summary["violations"] = violations.size();
  summary["config"] = sim.config().to_json();
  std::cout << summary.dump(2) << "\n";
  return violations.empty() ? kExitClean : kExitViolation;
}

int run_check_trace(const std::string& trace_path) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "cannot open trace file: " << trace_path << "\n";
    return kExitUsage;
  }
  std::vector<cbcast::TraceEvent> trace;
  cbcast::ExecutionState<Json> x;
  try {
    trace = cbcast::parse_trace(in);
    x = cbcast::execution_from_trace(trace);
  } catch (const cbcast::TraceParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<cbcast::Violation> violations;
  try {
    violations = cbcast::check_all(x);
  } catch (const std::invalid_argument& e) {
    // Duplicate events and the like: the trace is not a protocol history.
    std::cerr << "trace is not checkable: " << e.what() << "\n";
    return kExitUsage;
  }
  std::size_t lcd = 0, cd = 0, corr = 0;
  for (const auto& v : violations) {
    std::cout << cbcast::violation_to_json(v).dump() << "\n";
    switch (v.kind) {
      case cbcast::ViolationKind::Lcd: ++lcd; break;
      case cbcast::ViolationKind::Cd: ++cd; break;
      case cbcast::ViolationKind::Correspondence: ++corr; break;
    }
  }
  std::cout << Json{{"events", trace.size()},
                    {"violations", violations.size()},
                    {"lcd", lcd},
                    {"cd", cd},
                    {"correspondence", corr}}
                   .dump()
            << "\n";
  return violations.empty() ? kExitClean : kExitViolation;
}

int run_replay() {
  const auto replay = cbcast::replay_scenarios();
  auto vcs = [](const cbcast::ExecutionState<Json>& x) {
    Json out = Json::array();
    for (const auto& p : x.procs) out.push_back(p.vc.entries());
    return out;
  };
  const Json out{
      {"chain",
       {{"m1_vc", replay.chain_m1_vc.entries()},
        {"m2_vc", replay.chain_m2_vc.entries()},
        {"m3_vc", replay.chain_m3_vc.entries()},
        {"final_vcs", vcs(replay.chain)}}},
      {"fifo",
       {{"first_vc", replay.fifo_first_vc.entries()},
        {"second_vc", replay.fifo_second_vc.entries()},
        {"second_buffered", replay.fifo_second_buffered},
        {"receiver_vc", replay.fifo_receiver_vc.entries()},
        {"final_vcs", vcs(replay.fifo)}}},
      {"transitive",
       {{"reply_vc", replay.transitive_reply_vc.entries()},
        {"reply_buffered", replay.transitive_reply_buffered},
        {"receiver_vc", replay.transitive_receiver_vc.entries()},
        {"final_vcs", vcs(replay.transitive)}}},
  };
  std::cout << out.dump(2) << "\n";
  return kExitClean;
}

int run_kvs_node(const CLI::App& cmd, cbcast::kvs::NodeConfig node_cfg,
                 std::string listen, const std::vector<std::string>& peer_args,
                 const std::string& config_path) {
  if (!config_path.empty()) {
    const Json cfg = load_config_file(config_path);
    std::uint32_t id = node_cfg.self_id;
    overlay(cmd, "--id", cfg, "id", id);
    node_cfg.self_id = id;
    overlay(cmd, "--listen", cfg, "listen", listen);
    overlay(cmd, "--batch-max", cfg, "batch_max", node_cfg.batch_max);
    if (cmd.count("--peer") == 0 && cfg.contains("peers")) {
      for (const Json& p : cfg.at("peers")) {
        node_cfg.peers.push_back(cbcast::kvs::PeerAddress{
            p.at("id").get<cbcast::ProcessId>(),
            p.at("url").get<std::string>()});
      }
    }
  }
  for (const std::string& arg : peer_args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
      throw std::runtime_error("peer must look like ID=URL, got: " + arg);
    }
    node_cfg.peers.push_back(cbcast::kvs::PeerAddress{
        static_cast<cbcast::ProcessId>(std::stoul(arg.substr(0, eq))),
        arg.substr(eq + 1)});
  }
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon + 1 == listen.size()) {
    throw std::runtime_error("listen address must look like HOST:PORT, got: " +
                             listen);
  }
  node_cfg.listen_host = listen.substr(0, colon);
  node_cfg.listen_port = std::stoi(listen.substr(colon + 1));
  node_cfg.validate();

  cbcast::kvs::KvsService service(node_cfg);
  if (!service.bind()) {
    std::cerr << "cannot bind " << node_cfg.listen_host << ":"
              << node_cfg.listen_port << "\n";
    return kExitUsage;
  }
  service.start();
  std::cerr << "kvs node " << node_cfg.self_id << " listening on "
            << node_cfg.listen_host << ":" << service.port() << "\n";

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  service.stop();
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal broadcast toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "run a seeded randomized execution and check it");
  cbcast::SimConfig sim_cfg;
  std::string sim_config_path, trace_out;
  simulate->add_option("--procs", sim_cfg.n_procs, "number of processes");
  simulate->add_option("--seed", sim_cfg.seed, "PRNG seed");
  simulate->add_option("--steps", sim_cfg.max_steps, "step budget");
  simulate->add_option("--p-drop", sim_cfg.p_drop,
                       "per-recipient drop probability");
  simulate->add_option("--p-duplicate", sim_cfg.p_duplicate,
                       "per-recipient duplication probability");
  simulate->add_option("--broadcast-weight", sim_cfg.broadcast_weight,
                       "scheduling weight of broadcasts");
  simulate->add_option("--receive-weight", sim_cfg.receive_weight,
                       "scheduling weight of receives");
  simulate->add_option("--deliver-weight", sim_cfg.deliver_weight,
                       "scheduling weight of deliveries");
  simulate->add_option("--trace", trace_out, "write the JSON-lines trace here");
  simulate->add_option("--config", sim_config_path,
                       "JSON config file (flags override it)");

  // check-trace
  auto* check = app.add_subcommand(
      "check-trace", "check a JSON-lines trace for causal delivery");
  std::string trace_in;
  check->add_option("--trace", trace_in, "trace file to check")->required();

  // kvs-node
  auto* kvs = app.add_subcommand("kvs-node", "run one replicated KV node");
  cbcast::kvs::NodeConfig node_cfg;
  std::string listen = "127.0.0.1:8100";
  std::vector<std::string> peer_args;
  std::string node_config_path;
  kvs->add_option("--id", node_cfg.self_id, "this node's id");
  kvs->add_option("--listen", listen, "listen address, HOST:PORT");
  kvs->add_option("--peer", peer_args, "peer as ID=URL (repeatable)");
  kvs->add_option("--batch-max", node_cfg.batch_max,
                  "max messages per peer POST");
  kvs->add_option("--config", node_config_path,
                  "JSON config file (flags override it)");

  // replay-figures
  auto* replay = app.add_subcommand(
      "replay-figures", "print the scripted golden scenario states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(*simulate, sim_cfg, sim_config_path, trace_out);
    }
    if (check->parsed()) {
      return run_check_trace(trace_in);
    }
    if (kvs->parsed()) {
      return run_kvs_node(*kvs, node_cfg, listen, peer_args, node_config_path);
    }
    if (replay->parsed()) {
      return run_replay();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
