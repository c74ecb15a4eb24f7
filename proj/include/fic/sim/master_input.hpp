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

#include <filesystem>
#include <string>
#include <vector>

#include "fic/geom.hpp"
#include "fic/master_station.hpp"

namespace fic::sim {

/// One operator-device sample. Applies from its time until the next sample.
struct MasterSample {
  double t = 0.0;
  MasterModeKind mode = MasterModeKind::Position;
  Pose x_m;  // device pose relative to its home
  Twist v_m;
  double k_h = 0.0;  // raw gain request, clamped by the station
};

std::string mode_name(MasterModeKind m);
/// Accepts "position"/"velocity" (also "P"/"V"). Throws std::invalid_argument.
MasterModeKind parse_mode(const std::string& s);

/// First control tick at which a sample stamped t takes effect.
long sample_start_tick(double t, double dt);

/// CSV columns: t,mode,qw,qx,qy,qz,x,y,z,wx,wy,wz,vx,vy,vz,k_h.
std::vector<MasterSample> read_master_csv(const std::filesystem::path& path);
void write_master_csv(const std::filesystem::path& path, const std::vector<MasterSample>& s);

}  // namespace fic::sim
