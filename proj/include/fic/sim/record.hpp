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
#include <string>
#include <vector>

#include "fic/geom.hpp"
#include "fic/master_station.hpp"
#include "fic/motion_adaptation.hpp"

namespace fic::sim {

struct ArmRecord {
  VecX q;
  VecX dq;
  VecX tau;  // applied, after saturation
  Pose x;
  Wrench h_e;      // sensed environment wrench on the tool
  Pose x_delta;    // pose the NLPD tracked this tick
  Vec6 stiffness = Vec6::Zero();
  Vec6 h_d = Vec6::Zero();
  double manipulability = 0.0;
  int saturated = 0;         // joints at the torque limit
  double track_error = 0.0;  // |translation of x_delta - x|
};

/// One telemetry row, taken at the start of the tick it describes.
struct StepRecord {
  long tick = 0;
  double t = 0.0;
  std::vector<ArmRecord> arms;

  MasterModeKind mode = MasterModeKind::Position;
  Pose x_m;
  Pose x_d;  // master command sent this tick
  double k_h = 0.0;
  Wrench h_h = Wrench::zero(Frame::Master);

  std::uint64_t fwd_depth = 0, back_depth = 0;
  std::uint64_t fwd_dropped = 0, back_dropped = 0;

  AdaptationStatus status = AdaptationStatus::Optimal;
  double kkt_residual = 0.0;
  int active_set = 0;

  bool admittance = false;
  double admittance_offset = 0.0;  // |x_F translation|

  double kinetic = 0.0;
  double potential = 0.0;  // relative to the start
  double env_energy = 0.0;
  double env_load = 0.0;
  bool env_broken = false;
  double work_actuators = 0.0;   // cumulative
  double work_environment = 0.0; // cumulative, done on the arms
  double energy_residual = 0.0;
  double work_scale = 0.0;  // cumulative sum of |work| increments

  double grasp_residual = 0.0;
  double rel_error_lin = 0.0;
  double rel_error_ang = 0.0;

  int phase = 0;  // index into the schedule labels
};

/// Column names in trace order for arms with the given joint counts.
std::vector<std::string> record_columns(const std::vector<int>& dofs);

/// Appends the row values in column order.
void flatten(const StepRecord& r, std::vector<double>& out);

double mode_code(MasterModeKind m);
double status_code(AdaptationStatus s);

}  // namespace fic::sim
