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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fic/fic_controllers.hpp"
#include "fic/master_station.hpp"
#include "fic/motion_adaptation.hpp"
#include "fic/replica_station.hpp"
#include "fic/robot_model.hpp"

namespace fic::sim {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent scenario description. Reported before tick 0.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArmEntry {
  ArmModel model;
  VecX q0;
  std::string source;  // arm file as written in the scenario
};

/// From time `t` on, the listed settings apply. `label` names the window for
/// the metrics report.
struct ScheduleEntry {
  double t = 0.0;
  std::string label;
  bool admittance = false;
};

struct Bump {
  double x = 0.0, y = 0.0;
  double height = 0.0;  // m, along the surface normal
  double sigma = 0.05;  // m
};

/// Compliant surface pressed by the tool of arm 0: a plane with optional
/// Gaussian bumps. Force k*depth^p plus damping along the normal.
struct SoftSurfaceConfig {
  double stiffness = 2000.0;  // N/m^p
  double exponent = 1.5;
  double damping = 0.0;             // N s/m along the normal
  double tangential_damping = 0.0;  // N s/m in the surface plane
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // pointing out of the material
  std::vector<Bump> bumps;
};

struct ForceKey {
  double t;
  Vec3 force;
};

/// Scripted push F_s(t) applied through a compliant hand anchored where the
/// tool starts: F = F_s(t) - k_hand (x - x0) - b_hand v.
struct HumanPartnerConfig {
  std::vector<ForceKey> profile;
  double k_hand = 500.0;
  double b_hand = 20.0;
};

/// Fragile item squeezed between the two tool tips.
struct BrittleConfig {
  double mass = 0.05;          // kg
  double break_force = 2.0;    // N
  double stiffness = 500.0;    // N/m
  std::optional<double> length;  // rest length; defaults to the start separation
};

using EnvironmentConfig =
    std::variant<std::monostate, SoftSurfaceConfig, HumanPartnerConfig, BrittleConfig>;

struct ChannelConfig {
  double delay_ms = 0.0;  // round trip; each direction gets half
  double jitter_ms = 0.0;
  double drop_rate = 0.0;
};

struct MasterConfig {
  std::filesystem::path script;  // empty for live input
  double k_h = 0.0;
  WorkspaceLimits limits;
};

struct BimanualConfig {
  double squeeze = 0.5;  // N of internal force requested between the tools
  Vec3 separation_offset = Vec3::Zero();  // added to the desired relative translation
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  std::string description;
  std::filesystem::path source;

  double duration = 1.0;
  double dt = 1e-3;
  int substeps = 4;
  std::uint64_t seed = 1;

  std::vector<ArmEntry> arms;
  DefaultGains gains;
  MasterConfig master;
  AdmittanceState admittance;
  std::vector<ScheduleEntry> schedule;
  ReplicaTorqueOptions torque;
  CostWeights weights;
  LimitMargins margins;
  EnvironmentConfig environment;
  ChannelConfig channel;
  std::optional<BimanualConfig> bimanual;

  /// The parsed document, echoed into the trace sidecar as JSON text.
  std::string echo_json;

  long total_ticks() const;
  std::string environment_type() const;
  /// Schedule window active at time t (first entry when t precedes all).
  const ScheduleEntry& window_at(double t) const;
  /// Labels in schedule order without repeats.
  std::vector<std::string> window_labels() const;
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                            const std::string& source_name = "<string>");

struct ArmDescription {
  ArmModel model;
  VecX home;
};

ArmDescription load_arm(const std::filesystem::path& path);
ArmDescription parse_arm(const std::string& text, const std::string& source_name = "<string>");

}  // namespace fic::sim
