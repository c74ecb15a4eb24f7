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

#include "fic/fic_controllers.hpp"
#include "fic/geom.hpp"

namespace fic {

enum class MasterModeKind { Position, Velocity };

struct MasterMode {
  MasterModeKind kind = MasterModeKind::Position;
  Pose x_d0;  // replica command captured when Position mode was entered

  static MasterMode position(const Pose& x_d0) { return {MasterModeKind::Position, x_d0}; }
  static MasterMode velocity() { return {MasterModeKind::Velocity, Pose::identity()}; }
};

struct MasterState {
  Pose x_m;        // device pose relative to the device home
  Twist v_m;       // device twist
  double k_h = 0;  // haptic gain in [0, 1]
  Pose x_d_prev;   // last commanded replica pose
};

/// Replica pose command from the operator device. Position mode composes the
/// device displacement onto x_d0; velocity mode integrates the device twist
/// from the previous command. Updates state.x_d_prev.
Pose master_transform(const MasterMode& mode, MasterState& state, double dt);

/// Virtual-workspace haptics. The NLPD pulls the device back toward its home
/// once the displacement leaves a ball of the given radius (radius 0 means
/// the pull starts at home). Linear and angular parts use separate radii.
struct WorkspaceLimits {
  double radius_lin = 0.10;  // m
  double radius_ang = 0.5;   // rad
};

/// h_H = NLPD(-x_M) + K_H h_e. `h_e` must already be in the master frame.
Wrench master_haptics(const NlpdParams6& params, NlpdStates6& states, const MasterState& state,
                      const Wrench& h_e, const WorkspaceLimits& limits = {});

MasterState set_haptic_gain(const MasterState& state, double raw);

/// Owns the master-side loop state: handles mode changes so that the replica
/// command stays continuous, and re-zeroes the device displacement when
/// Position mode is entered.
class MasterStation {
 public:
  MasterStation(const NlpdParams6& haptic_params, const WorkspaceLimits& limits,
                const Pose& initial_command);

  /// Applies a mode request. Entering Position captures x_d0 = last command
  /// and takes the current device pose as the new displacement origin.
  void set_mode(MasterModeKind kind);
  void set_haptic_gain(double raw);

  /// Advances one tick with the raw device pose/twist; returns x_d.
  Pose command(const Pose& device_pose, const Twist& device_twist, double dt);

  /// Feedback for the operator from the latest remote wrench (master frame).
  Wrench haptics(const Wrench& h_e);

  const MasterMode& mode() const { return mode_; }
  const MasterState& state() const { return state_; }

 private:
  NlpdParams6 haptic_params_;
  NlpdStates6 haptic_states_{};
  WorkspaceLimits limits_;
  MasterMode mode_;
  MasterState state_;
  Pose device_origin_;
  Pose device_pose_;
};

}  // namespace fic
