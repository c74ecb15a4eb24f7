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

#include "fic/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace fic {

namespace {

void check_dim(const ArmModel& model, const VecX& v, const char* what) {
  if (v.size() != model.dof()) {
    throw std::invalid_argument(std::string(what) + " has dimension " + std::to_string(v.size()) +
                                ", model '" + model.name + "' has " +
                                std::to_string(model.dof()) + " joints");
  }
}

template <typename Getter>
VecX collect(const ArmModel& model, Getter get) {
  VecX out(model.dof());
  for (int i = 0; i < model.dof(); ++i) out(i) = get(model.joints[i]);
  return out;
}

Mat6X jacobian_from(const ArmModel& model, const ChainFrames& f, const Vec3& tool_point) {
  const Vec3 p = f.tool.translation + f.tool.rotation * tool_point;
  Mat6X jac(6, model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    const Vec3& z = f.axes[i];
    jac.col(i).head<3>() = z;
    jac.col(i).tail<3>() = z.cross(p - f.joints[i].translation);
  }
  return jac;
}

}  // namespace

VecX ArmModel::q_min() const { return collect(*this, [](const Joint& j) { return j.q_min; }); }
VecX ArmModel::q_max() const { return collect(*this, [](const Joint& j) { return j.q_max; }); }
VecX ArmModel::dq_max() const { return collect(*this, [](const Joint& j) { return j.dq_max; }); }
VecX ArmModel::tau_max() const { return collect(*this, [](const Joint& j) { return j.tau_max; }); }

void ArmModel::validate() const {
  if (dof() < 1 || dof() > 7) {
    throw std::invalid_argument("arm '" + name + "' must have between 1 and 7 joints");
  }
  for (int i = 0; i < dof(); ++i) {
    const Joint& j = joints[i];
    const std::string where = "arm '" + name + "' joint " + std::to_string(i) + ": ";
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw std::invalid_argument(where + "axis not unit");
    if (!(j.q_min < j.q_max)) throw std::invalid_argument(where + "q_min must be < q_max");
    if (!(j.mass >= 0.0)) throw std::invalid_argument(where + "negative mass");
    if (!(j.armature >= 0.0)) throw std::invalid_argument(where + "negative armature");
    if (!(j.dq_max > 0.0) || !(j.tau_max > 0.0)) {
      throw std::invalid_argument(where + "velocity and torque limits must be positive");
    }
    if ((j.inertia - j.inertia.transpose()).norm() > 1e-12) {
      throw std::invalid_argument(where + "inertia not symmetric");
    }
    if (j.mass > 0.0 && j.inertia.llt().info() != Eigen::Success) {
      throw std::invalid_argument(where + "inertia not positive definite");
    }
  }
}

ChainFrames chain_frames(const ArmModel& model, const VecX& q) {
  check_dim(model, q, "q");
  ChainFrames frames;
  frames.joints.reserve(model.joints.size());
  frames.axes.reserve(model.joints.size());
  Pose current;
  for (int i = 0; i < model.dof(); ++i) {
    const Joint& j = model.joints[i];
    current = compose(current, j.parent_offset);
    current = compose(current, Pose::from_rotation(
                                   Eigen::Quaterniond(Eigen::AngleAxisd(q(i), j.axis))));
    frames.joints.push_back(current);
    frames.axes.push_back(current.rotation * j.axis);
  }
  frames.tool = compose(current, model.tool_offset);
  return frames;
}

Pose forward_kinematics(const ArmModel& model, const VecX& q) {
  return chain_frames(model, q).tool;
}

Mat6X jacobian_world_at(const ArmModel& model, const VecX& q, const Vec3& tool_point) {
  return jacobian_from(model, chain_frames(model, q), tool_point);
}

Mat6X jacobian_world(const ArmModel& model, const VecX& q) {
  return jacobian_world_at(model, q, Vec3::Zero());
}

Pose relative_pose(const ArmModel& left, const ArmModel& right, const VecX& q_l,
                   const VecX& q_r) {
  return compose(inverse(forward_kinematics(left, q_l)), forward_kinematics(right, q_r));
}

Mat6X jacobian_relative(const ArmModel& left, const ArmModel& right, const VecX& q_l,
                        const VecX& q_r) {
  const Pose xl = forward_kinematics(left, q_l);
  const Pose xr = forward_kinematics(right, q_r);
  const Mat6X jl = jacobian_world(left, q_l);
  const Mat6X jr = jacobian_world(right, q_r);
  const Mat3 rlt = xl.rotation_matrix().transpose();
  const Mat3 arm = skew(xr.translation - xl.translation);

  Mat6X out(6, left.dof() + right.dof());
  // omega_rel = R_l^T (w_r - w_l); v_rel = R_l^T (v_r - v_l + (p_r - p_l) x w_l)
  out.block(0, 0, 3, left.dof()) = -rlt * jl.topRows<3>();
  out.block(3, 0, 3, left.dof()) = rlt * (-jl.bottomRows<3>() + arm * jl.topRows<3>());
  out.block(0, left.dof(), 3, right.dof()) = rlt * jr.topRows<3>();
  out.block(3, left.dof(), 3, right.dof()) = rlt * jr.bottomRows<3>();
  return out;
}

namespace {

VecX rnea(const ArmModel& model, const ChainFrames& f, const VecX& dq, const VecX& ddq,
          const Vec3& gravity) {
  const int n = model.dof();

  std::vector<Vec3> omega(n), alpha(n), acc_com(n), com(n);
  std::vector<Mat3> inertia(n);

  Vec3 w_prev = Vec3::Zero();
  Vec3 a_prev = Vec3::Zero();
  Vec3 acc_origin_prev = -gravity;  // base acceleration trick
  Vec3 p_prev = f.joints.empty() ? Vec3::Zero() : f.joints[0].translation;

  for (int i = 0; i < n; ++i) {
    const Vec3& z = f.axes[i];
    const Vec3 p = f.joints[i].translation;
    const Vec3 r = p - p_prev;
    const Vec3 acc_origin = acc_origin_prev + a_prev.cross(r) + w_prev.cross(w_prev.cross(r));

    omega[i] = w_prev + z * dq(i);
    alpha[i] = a_prev + z * ddq(i) + w_prev.cross(z * dq(i));

    const Mat3 rot = f.joints[i].rotation_matrix();
    com[i] = p + rot * model.joints[i].com;
    inertia[i] = rot * model.joints[i].inertia * rot.transpose();
    const Vec3 rc = com[i] - p;
    acc_com[i] = acc_origin + alpha[i].cross(rc) + omega[i].cross(omega[i].cross(rc));

    w_prev = omega[i];
    a_prev = alpha[i];
    acc_origin_prev = acc_origin;
    p_prev = p;
  }

  VecX tau(n);
  Vec3 f_next = Vec3::Zero();
  Vec3 n_next = Vec3::Zero();
  Vec3 p_next = Vec3::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const double m = model.joints[i].mass;
    const Vec3 p = f.joints[i].translation;
    const Vec3 force = m * acc_com[i] + f_next;
    Vec3 moment = inertia[i] * alpha[i] + omega[i].cross(inertia[i] * omega[i]) +
                  (com[i] - p).cross(m * acc_com[i]) + n_next;
    if (i + 1 < n) moment += (p_next - p).cross(f_next);
    tau(i) = f.axes[i].dot(moment) + model.joints[i].armature * ddq(i);
    f_next = force;
    n_next = moment;
    p_next = p;
  }
  return tau;
}

MatX crba(const ArmModel& model, const ChainFrames& f) {
  const int n = model.dof();
  MatX mass = MatX::Zero(n, n);

  // Composite body of links i..n-1: total mass, com, inertia about that com.
  double cm = 0.0;
  Vec3 cc = Vec3::Zero();
  Mat3 ci = Mat3::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const Joint& j = model.joints[i];
    const Mat3 rot = f.joints[i].rotation_matrix();
    const Vec3 c = f.joints[i].translation + rot * j.com;
    const Mat3 inertia = rot * j.inertia * rot.transpose();

    const double new_mass = cm + j.mass;
    Vec3 new_com = Vec3::Zero();
    if (new_mass > 0.0) new_com = (cm * cc + j.mass * c) / new_mass;
    // Parallel-axis shift of both parts to the new composite com.
    auto shift = [](double m, const Vec3& d) {
      return m * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
    };
    ci = ci + shift(cm, cc - new_com) + inertia + shift(j.mass, c - new_com);
    cm = new_mass;
    cc = new_com;

    const Vec3& z = f.axes[i];
    const Vec3 p = f.joints[i].translation;
    const Vec3 force = cm * z.cross(cc - p);
    const Vec3 moment = ci * z + (cc - p).cross(force);
    for (int k = 0; k <= i; ++k) {
      const Vec3 pk = f.joints[k].translation;
      const double value = f.axes[k].dot(moment + (p - pk).cross(force));
      mass(k, i) = value;
      mass(i, k) = value;
    }
    mass(i, i) += j.armature;
  }
  return mass;
}

}  // namespace

VecX inverse_dynamics(const ArmModel& model, const VecX& q, const VecX& dq, const VecX& ddq,
                      const Vec3& gravity) {
  check_dim(model, dq, "dq");
  check_dim(model, ddq, "ddq");
  return rnea(model, chain_frames(model, q), dq, ddq, gravity);
}

MatX gravity_torque_jacobian(const ArmModel& model, const VecX& q) {
  // G_i = z_i . (w_i x -g) with w_i = sum_{k>=i} m_k (c_k - o_i). A point
  // downstream of joint j moves by z_j x (x - o_j) per unit q_j.
  const ChainFrames f = chain_frames(model, q);
  const int n = model.dof();
  const Vec3 weight = -model.gravity;
  std::vector<Vec3> w(n);
  Vec3 s = Vec3::Zero();
  double mass = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    const Joint& jt = model.joints[k];
    s += jt.mass * (f.joints[k].translation + f.joints[k].rotation * jt.com);
    mass += jt.mass;
    w[k] = s - mass * f.joints[k].translation;
  }
  MatX d(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec3& zi = f.axes[i];
    for (int j = 0; j < n; ++j) {
      const Vec3& zj = f.axes[j];
      if (j < i) {
        d(i, j) = zj.cross(zi).dot(w[i].cross(weight)) + zi.dot(zj.cross(w[i]).cross(weight));
      } else {
        d(i, j) = zi.dot(zj.cross(w[j]).cross(weight));
      }
    }
  }
  return d;
}

MatX mass_matrix(const ArmModel& model, const VecX& q) {
  return crba(model, chain_frames(model, q));
}

DynamicsTerms dynamics_terms(const ArmModel& model, const ArmState& state) {
  check_dim(model, state.q, "q");
  check_dim(model, state.dq, "dq");
  const VecX zero = VecX::Zero(model.dof());
  DynamicsTerms terms;
  terms.mass = mass_matrix(model, state.q);
  terms.gravity = inverse_dynamics(model, state.q, zero, zero, model.gravity);
  if (state.dq.isZero(0.0)) {
    terms.coriolis = zero;
  } else {
    terms.coriolis = inverse_dynamics(model, state.q, state.dq, zero, Vec3::Zero());
  }
  return terms;
}

VecX forward_dynamics(const ArmModel& model, const ArmState& state, const VecX& tau,
                      const Wrench& external) {
  check_dim(model, state.dq, "dq");
  check_dim(model, tau, "tau");
  // One frame pass serves the bias forces, the inertia and the Jacobian.
  const ChainFrames f = chain_frames(model, state.q);
  VecX rhs = tau - rnea(model, f, state.dq, VecX::Zero(model.dof()), model.gravity);
  if (!external.vector().isZero(0.0)) {
    rhs += jacobian_from(model, f, Vec3::Zero()).transpose() * external.vector();
  }
  return crba(model, f).ldlt().solve(rhs);
}

double kinetic_energy(const ArmModel& model, const ArmState& state) {
  return 0.5 * state.dq.dot(mass_matrix(model, state.q) * state.dq);
}

double potential_energy(const ArmModel& model, const VecX& q) {
  const ChainFrames f = chain_frames(model, q);
  double energy = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    const Vec3 c = f.joints[i].translation + f.joints[i].rotation * model.joints[i].com;
    energy -= model.joints[i].mass * model.gravity.dot(c);
  }
  return energy;
}

StepResult step_dynamics(const ArmModel& model, const ArmState& state, const VecX& tau,
                         const Wrench& external, double dt) {
  check_dim(model, tau, "tau");
  if (!tau.allFinite()) throw std::domain_error("non-finite joint torque command");
  if (!(dt > 0.0 && dt <= 5e-3)) throw std::invalid_argument("dt must lie in (0, 5e-3]");

  auto deriv = [&](const VecX& q, const VecX& dq) {
    return forward_dynamics(model, ArmState{q, dq}, tau, external);
  };

  const VecX& q0 = state.q;
  const VecX& v0 = state.dq;
  const VecX a1 = deriv(q0, v0);
  const VecX q2 = q0 + 0.5 * dt * v0, v2 = v0 + 0.5 * dt * a1;
  const VecX a2 = deriv(q2, v2);
  const VecX q3 = q0 + 0.5 * dt * v2, v3 = v0 + 0.5 * dt * a2;
  const VecX a3 = deriv(q3, v3);
  const VecX q4 = q0 + dt * v3, v4 = v0 + dt * a3;
  const VecX a4 = deriv(q4, v4);

  StepResult out;
  out.state.q = q0 + dt / 6.0 * (v0 + 2.0 * v2 + 2.0 * v3 + v4);
  out.state.dq = v0 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  out.limited.assign(model.joints.size(), false);

  for (int i = 0; i < model.dof(); ++i) {
    const Joint& j = model.joints[i];
    if (out.state.q(i) >= j.q_max) {
      out.state.q(i) = j.q_max;
      if (out.state.dq(i) > 0.0) out.state.dq(i) = 0.0;
      out.limited[i] = true;
    } else if (out.state.q(i) <= j.q_min) {
      out.state.q(i) = j.q_min;
      if (out.state.dq(i) < 0.0) out.state.dq(i) = 0.0;
      out.limited[i] = true;
    }
  }
  return out;
}

double manipulability(const ArmModel& model, const VecX& q) {
  const Mat6X jac = jacobian_world(model, q);
  Eigen::JacobiSVD<MatX> svd(jac);
  const auto& s = svd.singularValues();
  const int k = std::min<int>(model.dof(), 6);
  return s(k - 1);
}

}  // namespace fic
