// Copyright 2026 The ficteleop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ficsim: headless scenario runner, trace metrics and the live endpoint.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fic/sim/config.hpp"
#include "fic/sim/metrics.hpp"
#include "fic/sim/scenario.hpp"
#include "fic/sim/server.hpp"
#include "fic/sim/trace.hpp"

namespace fs = std::filesystem;
using namespace fic::sim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

#ifndef FIC_SCENARIO_DIR
#define FIC_SCENARIO_DIR "scenarios"
#endif

int list_scenarios(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    std::cerr << "no scenario directory " << dir << "\n";
    return kExitConfig;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".cfg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    try {
      const ScenarioConfig cfg = load_config(f);
      std::printf("%-22s %6.1f s  %s\n", f.filename().c_str(), cfg.duration,
                  cfg.description.c_str());
    } catch (const ConfigError& e) {
      std::printf("%-22s  (invalid: %s)\n", f.filename().c_str(), e.what());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractal impedance teleoperation simulator"};
  app.require_subcommand(1);

  std::string config, out_dir = "traces", trace_path;
  std::string scenario_dir = FIC_SCENARIO_DIR;
  std::uint64_t seed = 0;
  int port = 0;
  int decimation = 10;

  CLI::App* run = app.add_subcommand("run", "run a scenario headless and write its trace");
  run->add_option("config", config, "scenario file")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();

  CLI::App* metrics = app.add_subcommand("metrics", "summarize a trace as JSON");
  metrics->add_option("trace", trace_path, "trace CSV")->required();

  CLI::App* serve = app.add_subcommand("serve", "run a scenario as a live session");
  serve->add_option("config", config, "scenario file")->required();
  serve->add_option("--port", port, "TCP port")->required();
  serve->add_option("--decimation", decimation, "stream every Nth tick")->capture_default_str();

  CLI::App* list = app.add_subcommand("list-scenarios", "list the shipped presets");
  list->add_option("--dir", scenario_dir, "scenario directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ScenarioConfig cfg = load_config(config);
      if (*seed_opt) cfg.seed = seed;
      const RunResult r = run_scenario(cfg, out_dir);
      std::cout << r.trace.string() << "\n";
      return 0;
    }
    if (*metrics) {
      const Trace t = read_trace(trace_path);
      std::cout << to_json(compute_metrics(t)).dump(2) << "\n";
      return 0;
    }
    if (*serve) {
      ServeOptions opt;
      opt.port = port;
      opt.decimation = decimation;
      return run_server(load_config(config), opt);
    }
    if (*list) return list_scenarios(scenario_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalAbort& e) {
    std::cerr << e.what() << "\n";
    return kExitNumerical;
  } catch (const TraceError& e) {
    std::cerr << "trace error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
