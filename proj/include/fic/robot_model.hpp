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

#include <string>
#include <vector>

#include "fic/geom.hpp"

namespace fic {

/// One revolute joint and the link it drives. The joint rotates about `axis`
/// (joint frame), located at `parent_offset` relative to the previous joint
/// frame (or to the world for the first joint). Inertial data is given in the
/// joint frame after rotation.
struct Joint {
  Vec3 axis = Vec3::UnitZ();
  Pose parent_offset;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  // about the com
  double armature = 0.0;        // reflected rotor inertia on the joint axis
  double q_min = -M_PI;
  double q_max = M_PI;
  double dq_max = 2.0;
  double tau_max = 50.0;
};

struct ArmModel {
  std::string name;
  std::vector<Joint> joints;
  Pose tool_offset;
  Vec3 gravity{0.0, 0.0, -9.81};

  int dof() const { return static_cast<int>(joints.size()); }
  VecX q_min() const;
  VecX q_max() const;
  VecX dq_max() const;
  VecX tau_max() const;

  /// Throws std::invalid_argument on a malformed description.
  void validate() const;
};

struct ArmState {
  VecX q;
  VecX dq;

  static ArmState at_rest(const VecX& q) { return {q, VecX::Zero(q.size())}; }
};

struct DynamicsTerms {
  MatX mass;     // M(q)
  VecX coriolis; // C(q, dq) dq
  VecX gravity;  // G(q)
};

/// World poses of every joint frame (after the joint rotation) plus the tool.
struct ChainFrames {
  std::vector<Pose> joints;
  std::vector<Vec3> axes;  // world joint axes
  Pose tool;
};

ChainFrames chain_frames(const ArmModel& model, const VecX& q);

Pose forward_kinematics(const ArmModel& model, const VecX& q);

/// 6xn map from joint rates to the tool twist [omega; v_tool] in the base frame.
Mat6X jacobian_world(const ArmModel& model, const VecX& q);

/// Jacobian at a point rigidly attached to the tool, given in tool coordinates.
Mat6X jacobian_world_at(const ArmModel& model, const VecX& q, const Vec3& tool_point);

/// Relative pose of the right tool seen from the left tool: inverse(x_l) * x_r.
Pose relative_pose(const ArmModel& left, const ArmModel& right, const VecX& q_l, const VecX& q_r);

/// 6x(n_l+n_r) map from stacked joint rates to the relative twist of the right
/// tool, expressed in the left tool frame.
Mat6X jacobian_relative(const ArmModel& left, const ArmModel& right, const VecX& q_l,
                        const VecX& q_r);

/// Inverse dynamics by recursive Newton-Euler with an explicit gravity vector.
VecX inverse_dynamics(const ArmModel& model, const VecX& q, const VecX& dq, const VecX& ddq,
                      const Vec3& gravity);

/// dG/dq of the gravity torque G(q) = inverse_dynamics(q, 0, 0, gravity).
MatX gravity_torque_jacobian(const ArmModel& model, const VecX& q);

/// Joint-space inertia by the composite-rigid-body algorithm.
MatX mass_matrix(const ArmModel& model, const VecX& q);

DynamicsTerms dynamics_terms(const ArmModel& model, const ArmState& state);

VecX forward_dynamics(const ArmModel& model, const ArmState& state, const VecX& tau,
                      const Wrench& external);

double kinetic_energy(const ArmModel& model, const ArmState& state);
/// Gravitational potential energy, zero at the base height.
double potential_energy(const ArmModel& model, const VecX& q);

struct StepResult {
  ArmState state;
  std::vector<bool> limited;  // joints clamped this step
};

/// RK4 advance of M ddq = tau + J^T h_ext - C - G over dt, then joint-limit
/// clamping. Throws std::domain_error on non-finite torque.
StepResult step_dynamics(const ArmModel& model, const ArmState& state, const VecX& tau,
                         const Wrench& external, double dt);

/// Smallest of the first min(n, 6) singular values of jacobian_world.
double manipulability(const ArmModel& model, const VecX& q);

}  // namespace fic
