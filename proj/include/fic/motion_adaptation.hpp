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
#include <string>
#include <vector>

#include "fic/geom.hpp"
#include "fic/qp_solver.hpp"
#include "fic/robot_model.hpp"

namespace fic {

using GraspMatrix = Eigen::Matrix<double, 6, 12>;

/// Maps stacked contact wrenches [h_left; h_right] (base frame, applied at the
/// tool points) to the net wrench on the object about `object_pose`.
/// Throws std::invalid_argument when the two contact points coincide.
GraspMatrix grasp_matrix(const Pose& object_pose, const std::array<Pose, 2>& tool_poses);

/// Gravity wrench [torque; force] of the object about its reference point.
Vec6 object_gravity_wrench(double mass, const Vec3& gravity);

struct CostWeights {
  double task_lin = 1e4;
  double task_ang = 1e3;
  double dq_reg = 1.0;
  double wrench_reg = 1e-2;
  double relative_lin = 1e4;
  double relative_ang = 1e3;
};

struct LimitMargins {
  double q = 0.0;                // rad kept clear of the joint range ends
  double dq_fraction = 1.0;      // of dq_max, per control tick
  double tau_fraction = 1.0;     // of tau_max
  double manipulability_floor = 0.01;
};

struct GraspSpec {
  double object_mass = 0.0;
  Pose object_pose;   // current object reference pose (world)
  Pose x_r_desired;   // desired right tool pose in the left tool frame
};

/// Current decision state x_D = [q; h_d] over all arms.
struct DesiredState {
  std::vector<VecX> q;      // per arm
  std::vector<Vec6> h_d;    // per arm, wrench exerted by the tool (base frame)
};

enum class AdaptationStatus { Optimal, ClampedFeasible, Infeasible };
std::string to_string(AdaptationStatus s);

/// One row block of the inequality stack, for diagnostics and tests.
struct ConstraintLabel {
  std::string kind;  // q_min, q_max, dq_min, dq_max, tau_min, tau_max, manipulability
  int arm;
  int joint;  // -1 for arm-level rows
};

struct AdaptationProblem {
  DesiredState x_d;
  std::vector<int> dofs;
  int num_arms() const { return static_cast<int>(dofs.size()); }
  int num_q() const;
  int num_vars() const { return num_q() + 6 * num_arms(); }

  // min || C dx - c ||^2_w  s.t.  C_eq dx + c_eq = 0,  C_ineq dx + c_ineq >= 0
  MatX c_cost;
  VecX c_cost_rhs;
  VecX weights;
  MatX c_eq;
  VecX c_eq_rhs;
  MatX c_ineq;
  VecX c_ineq_rhs;
  std::vector<ConstraintLabel> ineq_labels;

  std::optional<GraspMatrix> grasp;
  Vec6 gravity_wrench = Vec6::Zero();

  /// Inequality slacks at dx = 0.
  VecX slacks() const { return c_ineq_rhs; }
  QpProblem to_qp() const;
};

struct AdaptationSolution {
  VecX delta;  // [dq (all arms); dh_d (all arms)]
  AdaptationStatus status = AdaptationStatus::Infeasible;
  double kkt_residual = 0.0;
  int active_set_size = 0;

  VecX delta_q(const AdaptationProblem& p) const { return delta.head(p.num_q()); }
  VecX delta_h(const AdaptationProblem& p) const { return delta.tail(6 * p.num_arms()); }
};

struct AdaptationConfig {
  CostWeights weights;
  LimitMargins margins;
  double dt = 1e-3;
  std::optional<GraspSpec> grasp;
  /// Requested tool wrenches; the solver regularizes h_d toward these.
  std::vector<Vec6> h_request;
};

AdaptationProblem build_problem(const std::vector<const ArmModel*>& models,
                                const DesiredState& x_d, const std::vector<Pose>& targets,
                                const AdaptationConfig& config);

AdaptationSolution solve_sqp_step(const AdaptationProblem& problem);

/// x_D + dx_D, with q clamped into the joint range. Throws on Infeasible.
DesiredState apply_solution(const std::vector<const ArmModel*>& models, const DesiredState& x_d,
                            const AdaptationProblem& problem, const AdaptationSolution& sol);

/// Minimizer of the cost under the equality constraints only, computed by a
/// direct KKT solve. When it satisfies every inequality it is what the QP
/// must return unchanged.
VecX desired_increment(const AdaptationProblem& problem);

}  // namespace fic
