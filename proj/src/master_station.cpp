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

#include "fic/master_station.hpp"

#include <algorithm>
#include <stdexcept>

namespace fic {

Pose master_transform(const MasterMode& mode, MasterState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("master_transform: dt must be > 0");
  Pose x_d;
  if (mode.kind == MasterModeKind::Position) {
    x_d = compose(mode.x_d0, state.x_m);
  } else {
    x_d = integrate_twist(state.x_d_prev, state.v_m, dt);
  }
  state.x_d_prev = x_d;
  return x_d;
}

namespace {

// Portion of a 3-vector lying outside a ball of the given radius.
Vec3 beyond_radius(const Vec3& v, double radius) {
  const double n = v.norm();
  if (n <= radius || n == 0.0) return Vec3::Zero();
  return v * (1.0 - radius / n);
}

}  // namespace

Wrench master_haptics(const NlpdParams6& params, NlpdStates6& states, const MasterState& state,
                      const Wrench& h_e, const WorkspaceLimits& limits) {
  if (h_e.frame != Frame::Master) {
    throw std::invalid_argument("master_haptics expects the remote wrench in the master frame");
  }
  // Desired state is the device home, measured state is x_M.
  const Vec6 raw = pose_error(Pose::identity(), state.x_m);
  Vec6 error;
  error.head<3>() = beyond_radius(raw.head<3>(), limits.radius_ang);
  error.tail<3>() = beyond_radius(raw.tail<3>(), limits.radius_lin);

  Vec6 velocity = state.v_m.vector();
  if (error.head<3>().isZero(0.0)) velocity.head<3>().setZero();
  if (error.tail<3>().isZero(0.0)) velocity.tail<3>().setZero();

  const Vec6 virtual_wrench = nlpd_wrench_from_error(params, states, error, velocity);
  const double k_h = std::clamp(state.k_h, 0.0, 1.0);
  return Wrench::from_vector(virtual_wrench + k_h * h_e.vector(), Frame::Master);
}

MasterState set_haptic_gain(const MasterState& state, double raw) {
  MasterState out = state;
  out.k_h = std::clamp(raw, 0.0, 1.0);
  return out;
}

MasterStation::MasterStation(const NlpdParams6& haptic_params, const WorkspaceLimits& limits,
                             const Pose& initial_command)
    : haptic_params_(haptic_params),
      limits_(limits),
      mode_(MasterMode::position(initial_command)) {
  state_.x_d_prev = initial_command;
}

void MasterStation::set_mode(MasterModeKind kind) {
  if (kind == mode_.kind) return;
  if (kind == MasterModeKind::Position) {
    mode_ = MasterMode::position(state_.x_d_prev);
    device_origin_ = device_pose_;
    state_.x_m = Pose::identity();
  } else {
    mode_ = MasterMode::velocity();
  }
}

void MasterStation::set_haptic_gain(double raw) { state_ = fic::set_haptic_gain(state_, raw); }

Pose MasterStation::command(const Pose& device_pose, const Twist& device_twist, double dt) {
  device_pose_ = device_pose;
  state_.x_m = compose(inverse(device_origin_), device_pose);
  state_.v_m = device_twist;
  return master_transform(mode_, state_, dt);
}

Wrench MasterStation::haptics(const Wrench& h_e) {
  // Workspace feedback is about the physical device, so it uses the raw pose.
  MasterState device = state_;
  device.x_m = device_pose_;
  return master_haptics(haptic_params_, haptic_states_, device, h_e, limits_);
}

}  // namespace fic
