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

#include "fic/replica_station.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fic {

Wrench estimate_interaction(const Wrench& h_e, const Wrench& h_d) { return h_e - h_d; }

Wrench estimate_interaction_bimanual(const Eigen::Matrix<double, 6, 12>& grasp,
                                     const Wrench& h_e_left, const Wrench& h_e_right,
                                     const Vec6& gravity_wrench) {
  if (h_e_left.frame != Frame::Base || h_e_right.frame != Frame::Base) {
    throw std::invalid_argument("bimanual interaction expects base-frame sensor wrenches");
  }
  Eigen::Matrix<double, 12, 1> stacked;
  stacked << h_e_left.vector(), h_e_right.vector();
  return Wrench::from_vector(grasp * stacked - gravity_wrench, Frame::Object);
}

AdmittanceState admittance_step(const AdmittanceState& state, const Wrench& h_est,
                                const Wrench& h_desired, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("admittance_step: dt must be > 0");
  AdmittanceState next = state;
  if (!state.enabled) {
    next.reset();
    return next;
  }
  const Vec6 acc = state.m_inv.cwiseProduct((h_est - h_desired).vector());
  Vec6 dv;
  for (int i = 0; i < 6; ++i) {
    const double step = std::min(std::abs(acc(i)) * dt, state.dv_max(i));
    dv(i) = acc(i) > 0.0 ? step : (acc(i) < 0.0 ? -step : 0.0);
  }
  next.x_f = integrate_twist(state.x_f, state.v_f, dt);
  next.v_f = Twist::from_vector(state.v_f.vector() + dv);
  return next;
}

Pose fuse_command(const Pose& x_d, const Pose& x_f, const std::optional<Pose>& x_auto) {
  const Pose base = x_auto.value_or(Pose::identity());
  return compose(compose(base, x_d), x_f);
}

bool TorqueBreakdown::any_saturated() const {
  return std::any_of(saturated.begin(), saturated.end(), [](bool b) { return b; });
}

TorqueBreakdown replica_torque(const ArmModel& model, const ArmState& state,
                               const ReplicaCommand& cmd, NlpdController& nlpd,
                               const PdParams& pd_joint,
                               const std::optional<RelativeTerm>& relative,
                               const ReplicaTorqueOptions& options) {
  const int n = model.dof();
  if (state.q.size() != n || state.dq.size() != n || cmd.q_d.size() != n) {
    throw std::invalid_argument("replica_torque: dimension mismatch");
  }
  if (cmd.h_d.frame != Frame::Base) {
    throw std::invalid_argument("replica_torque: h_d must be in the base frame");
  }
  TorqueBreakdown out;
  const DynamicsTerms dyn = dynamics_terms(model, state);
  out.coriolis = dyn.coriolis;
  out.gravity = dyn.gravity;

  const Mat6X jw = jacobian_world(model, state.q);
  const Pose x = forward_kinematics(model, state.q);
  const Twist nu = Twist::from_vector(jw * state.dq);

  out.joint_pd = options.switches.joint_pd ? pd_joint_torque(pd_joint, cmd.q_d, state.q, state.dq)
                                           : VecX::Zero(n);
  if (options.switches.interaction) {
    const Mat6X jl = options.interaction_point.isZero(0.0)
                         ? jw
                         : jacobian_world_at(model, state.q, options.interaction_point);
    out.interaction = jl.transpose() * cmd.h_d.vector();
  } else {
    out.interaction = VecX::Zero(n);
  }

  out.task_wrench = nlpd.wrench(cmd.x_delta, x, nu);
  out.stiffness = nlpd.stiffness(cmd.x_delta, x);
  out.task = jw.transpose() * out.task_wrench.vector();

  out.relative = VecX::Zero(n);
  if (relative && options.switches.relative) {
    if (relative->jacobian_block.cols() != n) {
      throw std::invalid_argument("replica_torque: relative Jacobian block has wrong width");
    }
    const Vec6 err = pose_error(relative->x_r_desired, relative->x_r);
    const Vec6 w = pd_wrench_from_error(relative->pd, err, relative->v_r.vector());
    out.relative = relative->jacobian_block.transpose() * w;
  }

  out.unsaturated =
      out.coriolis + out.gravity + out.joint_pd + out.interaction + out.task + out.relative;
  out.total = out.unsaturated;
  out.saturated.assign(n, false);
  for (int i = 0; i < n; ++i) {
    const double lim = model.joints[i].tau_max;
    if (std::abs(out.total(i)) > lim) {
      out.total(i) = std::clamp(out.total(i), -lim, lim);
      out.saturated[i] = true;
    }
  }
  return out;
}

RelativeState relative_state(const ArmModel& left, const ArmModel& right, const ArmState& s_l,
                             const ArmState& s_r) {
  RelativeState out;
  out.x_r = relative_pose(left, right, s_l.q, s_r.q);
  out.jacobian = jacobian_relative(left, right, s_l.q, s_r.q);
  VecX dq(s_l.dq.size() + s_r.dq.size());
  dq << s_l.dq, s_r.dq;
  out.v_r = Twist::from_vector(out.jacobian * dq);
  return out;
}

}  // namespace fic
