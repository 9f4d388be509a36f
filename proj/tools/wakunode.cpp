/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <waku/daemon.hpp>
#include <waku/log.hpp>
#include <waku/simnet.hpp>

namespace {

  constexpr std::string_view kUsage =
      "usage: wakunode [--name:value ...]\n"
      "       wakunode sim --scenario <file> --seed <n> [--metrics-out <csv>]\n"
      "\n"
      "Node flags: --staticnode --relay --topics --store --persist-messages\n"
      "  --store-capacity --filter --lightpush --filter-light --lightpush-light\n"
      "  --rpc --rpcAddress --rpc-port --listen-port --peer-list-url\n"
      "  --peer-list-key --data-dir --nodekey --mesh-degree\n"
      "  --heartbeat-interval-ms --seen-ttl-ms --gossip-window\n";

  int run_sim(int argc, char **argv) {
    CLI::App app{"Run a simulated network scenario", "wakunode sim"};
    std::string scenario_path;
    std::uint64_t seed = 0;
    std::string metrics_out;
    std::string transcript_out;
    app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    app.add_option("--seed", seed, "Simulation seed")->required();
    app.add_option("--metrics-out", metrics_out, "Write dissemination metrics as CSV");
    app.add_option("--transcript-out", transcript_out,
                   "Write the transcript here instead of standard output");
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
      return app.exit(e);
    }

    waku::log().set_level(spdlog::level::warn);
    std::ifstream in(scenario_path);
    if (!in) {
      std::cerr << "wakunode sim: cannot read " << scenario_path << "\n";
      return 2;
    }
    try {
      auto scenario = waku::Json::parse(in);
      waku::Sim sim(waku::scenario_config(scenario, seed));
      auto report = waku::run_scenario(sim, scenario);

      auto text = report.transcript.text();
      if (transcript_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(transcript_out) << text;
      }
      if (!metrics_out.empty()) {
        std::ofstream out(metrics_out);
        out << waku::metrics(report.transcript).csv();
        if (!out) {
          std::cerr << "wakunode sim: cannot write " << metrics_out << "\n";
          return 2;
        }
      }
      for (const auto &v : sim.violations()) {
        std::cerr << "violation: " << v << "\n";
      }
      if (!report.success) {
        std::cerr << "scenario failed: " << report.failure << "\n";
        return 1;
      }
      std::cerr << "scenario passed: " << report.steps.size() << " steps, "
                << report.transcript.events.size() << " events\n";
      return sim.violations().empty() ? 0 : 1;
    } catch (const waku::Json::exception &e) {
      std::cerr << "wakunode sim: bad scenario JSON: " << e.what() << "\n";
      return 2;
    } catch (const waku::Error &e) {
      std::cerr << "wakunode sim: " << e.what() << "\n";
      return 2;
    }
  }

  int run_node(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (const auto &a : args) {
      if (a == "--help" || a == "-h") {
        std::cout << kUsage;
        return 0;
      }
    }
    waku::NodeConfig config;
    try {
      config = waku::parse_config(args);
    } catch (const waku::ConfigError &e) {
      std::cerr << "wakunode: " << e.what() << "\n" << kUsage;
      return 2;
    }

    // Block before any thread exists so only sigwait sees these.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    try {
      waku::Daemon daemon(config);
      daemon.start();
      int sig = 0;
      sigwait(&signals, &sig);
      waku::log().info("peer={} event=signal number={}", daemon.id().str(), sig);
      daemon.stop();
    } catch (const waku::Error &e) {
      std::cerr << "wakunode: " << e.what() << "\n";
      return 1;
    }
    return 0;
  }

}  // namespace

int main(int argc, char **argv) {
  if (argc > 1 && std::string_view(argv[1]) == "sim") {
    return run_sim(argc - 1, argv + 1);
  }
  return run_node(argc, argv);
}
