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

#pragma once

#include <deque>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fic/fic_controllers.hpp"
#include "fic/master_station.hpp"
#include "fic/motion_adaptation.hpp"
#include "fic/replica_station.hpp"
#include "fic/sim/channel.hpp"
#include "fic/sim/config.hpp"
#include "fic/sim/environment.hpp"
#include "fic/sim/master_input.hpp"
#include "fic/sim/record.hpp"
#include "json.hpp"

namespace fic::sim {

/// Non-finite plant state. Carries the tick that produced it.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(long tick, const std::string& what)
      : std::runtime_error("numerical abort at tick " + std::to_string(tick) + ": " + what),
        tick_(tick) {}
  long tick() const { return tick_; }

 private:
  long tick_;
};

struct CommandMsg {
  double t;
  Pose x_d;
};

struct FeedbackMsg {
  double t;
  Wrench h;  // base frame
};

/// Where master samples come from.
enum class InputSource { Script, Live };

/// The closed teleoperation loop at a fixed control rate. Single threaded;
/// every random draw comes from the config seed.
class Simulation {
 public:
  /// Throws ConfigError when the scenario cannot start.
  Simulation(const ScenarioConfig& cfg, InputSource source = InputSource::Script);

  /// Queues a live device sample. It takes effect at the first tick whose
  /// time reaches sample.t and holds until the next one does.
  void push_input(const MasterSample& sample);

  /// Advances one tick and returns its record. Throws NumericalAbort.
  const StepRecord& step();

  long tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * cfg_.dt; }
  bool done() const { return tick_ >= cfg_.total_ticks(); }

  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& phase_labels() const { return labels_; }
  const StepRecord& last() const { return record_; }

 private:
  std::vector<ToolState> tool_states() const;
  Pose object_pose(const std::vector<Pose>& tools) const;
  std::vector<Vec6> wrench_request(const std::vector<Pose>& tools) const;
  Wrench object_interaction(const std::vector<Wrench>& h_e) const;
  double mechanical_energy() const;

  ScenarioConfig cfg_;
  std::vector<std::string> columns_;
  std::vector<std::string> labels_;
  std::vector<const ArmModel*> models_;
  std::vector<ArmState> states_;
  std::vector<NlpdController> nlpd_;
  std::unique_ptr<Environment> env_;

  MasterStation master_;
  std::deque<MasterSample> pending_;
  double last_pushed_t_ = -std::numeric_limits<double>::infinity();
  MasterSample input_;
  DelayChannel<CommandMsg> fwd_;
  DelayChannel<FeedbackMsg> back_;
  Pose received_cmd_;
  Wrench received_feedback_ = Wrench::zero();

  AdmittanceState admittance_;
  DesiredState x_D_;
  std::vector<Pose> nlpd_target_;
  std::vector<Pose> grasp_offsets_;  // tool poses in the object frame
  Pose x_r_desired_;

  std::vector<Wrench> h_e_;
  double energy0_ = 0.0;
  double potential0_ = 0.0;
  double work_act_ = 0.0;
  double work_env_ = 0.0;
  double work_abs_ = 0.0;  // sum of |work| terms, the scale of the balance

  long tick_ = 0;
  StepRecord record_;
};

/// Sidecar metadata for a trace of this simulation.
nlohmann::json trace_sidecar(const Simulation& sim);

struct RunResult {
  std::filesystem::path trace;
  long ticks = 0;
};

/// Runs the scenario headless to completion and writes <out>/<name>.csv plus
/// its .json sidecar. Throws ConfigError or NumericalAbort.
RunResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace fic::sim
