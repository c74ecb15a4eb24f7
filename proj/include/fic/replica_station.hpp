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

#include <optional>
#include <vector>

#include "fic/fic_controllers.hpp"
#include "fic/geom.hpp"
#include "fic/robot_model.hpp"

namespace fic {

/// Admittance layer state: the compliant offset x_F and its twist.
struct AdmittanceState {
  Pose x_f;
  Twist v_f;
  Vec6 m_inv = (Vec6() << 2.0, 2.0, 2.0, 0.1, 0.1, 0.1).finished();  // 1/0.5 kg m^2, 1/10 kg
  Vec6 dv_max = (Vec6() << 0.01, 0.01, 0.01, 0.002, 0.002, 0.002).finished();
  bool enabled = false;

  void reset() {
    x_f = Pose::identity();
    v_f = Twist::zero();
  }
};

struct ReplicaCommand {
  Pose x_delta;
  Wrench h_d;  // wrench the tool should exert on the environment
  VecX q_d;
};

/// h_est = h_e - h_d for a single arm.
Wrench estimate_interaction(const Wrench& h_e, const Wrench& h_d);

/// Net interaction on a held object: grasp-mapped sum of both sensor wrenches
/// with the object weight removed. `grasp` is the 6x12 grasp matrix and
/// `gravity_wrench` the object weight about its reference point.
Wrench estimate_interaction_bimanual(const Eigen::Matrix<double, 6, 12>& grasp,
                                     const Wrench& h_e_left, const Wrench& h_e_right,
                                     const Vec6& gravity_wrench);

/// One admittance tick. Per axis the twist increment is the integrated
/// acceleration clamped in magnitude to dv_max; the pose advances with the
/// twist from the start of the tick.
AdmittanceState admittance_step(const AdmittanceState& state, const Wrench& h_est,
                                const Wrench& h_desired, double dt);

/// x_delta = x_auto * x_d * x_F.
Pose fuse_command(const Pose& x_d, const Pose& x_f, const std::optional<Pose>& x_auto = {});

/// Individually switchable terms of the torque law. The NLPD term is always on.
struct TorqueSwitches {
  bool joint_pd = true;
  bool interaction = true;  // J_l^T h_d
  bool relative = true;
};

/// Inputs of the relative-pose PD for two-arm coordination, one arm's share.
struct RelativeTerm {
  Mat6X jacobian_block;  // columns of J_r belonging to this arm
  Pose x_r_desired;
  Pose x_r;
  Twist v_r;  // relative twist in the left-tool frame
  PdParams6 pd;
};

struct TorqueBreakdown {
  VecX coriolis;
  VecX gravity;
  VecX joint_pd;
  VecX interaction;
  VecX task;
  VecX relative;
  Wrench task_wrench;
  Vec6 stiffness = Vec6::Zero();

  VecX unsaturated;           // sum of all enabled terms
  VecX total;                 // after clamping to tau_max
  std::vector<bool> saturated;
  bool any_saturated() const;
};

struct ReplicaTorqueOptions {
  TorqueSwitches switches;
  /// Point of interaction in tool coordinates; J_l = J_w when zero.
  Vec3 interaction_point = Vec3::Zero();
};

/// tau = C + G + PD_joint(q_d, q, dq) + J_l^T h_d + J_w^T NLPD(x_delta, x, nu)
///       [+ J_r^T PD_rel] with each entry clamped to the model's tau_max.
TorqueBreakdown replica_torque(const ArmModel& model, const ArmState& state,
                               const ReplicaCommand& cmd, NlpdController& nlpd,
                               const PdParams& pd_joint,
                               const std::optional<RelativeTerm>& relative = {},
                               const ReplicaTorqueOptions& options = {});

/// Relative pose PD for two arms: wrench in the left-tool frame, plus the
/// relative pose, twist and Jacobian it was computed from.
struct RelativeState {
  Pose x_r;
  Twist v_r;
  Mat6X jacobian;
};

RelativeState relative_state(const ArmModel& left, const ArmModel& right, const ArmState& s_l,
                             const ArmState& s_r);

}  // namespace fic
