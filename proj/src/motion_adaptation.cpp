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

#include "fic/motion_adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace fic {

GraspMatrix grasp_matrix(const Pose& object_pose, const std::array<Pose, 2>& tool_poses) {
  if ((tool_poses[0].translation - tool_poses[1].translation).norm() < 1e-9) {
    throw std::invalid_argument("grasp_matrix: contact points coincide");
  }
  GraspMatrix g = GraspMatrix::Zero();
  for (int i = 0; i < 2; ++i) {
    const Vec3 r = tool_poses[i].translation - object_pose.translation;
    // torque about the object point: n_i + r_i x f_i
    g.block<3, 3>(0, 6 * i) = Mat3::Identity();
    g.block<3, 3>(0, 6 * i + 3) = skew(r);
    g.block<3, 3>(3, 6 * i + 3) = Mat3::Identity();
  }
  return g;
}

Vec6 object_gravity_wrench(double mass, const Vec3& gravity) {
  Vec6 w = Vec6::Zero();
  w.tail<3>() = mass * gravity;
  return w;
}

std::string to_string(AdaptationStatus s) {
  switch (s) {
    case AdaptationStatus::Optimal: return "optimal";
    case AdaptationStatus::ClampedFeasible: return "clamped";
    case AdaptationStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

int AdaptationProblem::num_q() const { return std::accumulate(dofs.begin(), dofs.end(), 0); }

QpProblem AdaptationProblem::to_qp() const {
  QpProblem qp;
  const MatX wc = weights.asDiagonal() * c_cost;
  qp.hessian = c_cost.transpose() * wc;
  qp.gradient = -(wc.transpose() * c_cost_rhs);
  qp.a_eq = c_eq;
  qp.b_eq = c_eq_rhs;
  qp.a_in = c_ineq;
  qp.b_in = c_ineq_rhs;
  return qp;
}

namespace {

struct RowBuilder {
  std::vector<VecX> rows;
  std::vector<double> rhs;
  std::vector<double> weights;
  int cols;

  void add(const VecX& row, double r, double w = 1.0) {
    rows.push_back(row);
    rhs.push_back(r);
    weights.push_back(w);
  }
  MatX matrix() const {
    MatX m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
    return m;
  }
  VecX vector(const std::vector<double>& v) const {
    return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
};

// Static joint torque G(q) + J^T h needed to hold the commanded wrench.
VecX gravity_torque(const ArmModel& model, const VecX& q) {
  const VecX zero = VecX::Zero(model.dof());
  return inverse_dynamics(model, q, zero, zero, model.gravity);
}

// dJ/dq_j of the world tool Jacobian, for every j, from one frame pass.
std::vector<Mat6X> jacobian_partials(const ArmModel& model, const VecX& q) {
  const ChainFrames f = chain_frames(model, q);
  const int n = model.dof();
  const Vec3& p = f.tool.translation;
  std::vector<Mat6X> d(n, Mat6X::Zero(6, n));
  for (int j = 0; j < n; ++j) {
    const Vec3& zj = f.axes[j];
    for (int i = 0; i < n; ++i) {
      const Vec3& zi = f.axes[i];
      const Vec3 r = p - f.joints[i].translation;
      Vec3 dz = Vec3::Zero();
      Vec3 dr;
      if (j < i) {
        dz = zj.cross(zi);
        dr = zj.cross(r);  // the tool point and joint i move together
      } else {
        dr = zj.cross(p - f.joints[j].translation);
      }
      d[j].col(i).head<3>() = dz;
      d[j].col(i).tail<3>() = dz.cross(r) + zi.cross(dr);
    }
  }
  return d;
}

struct ManipulabilityLinearization {
  double value;
  VecX gradient;
  bool well_separated;
};

ManipulabilityLinearization linearize_manipulability(const ArmModel& model, const VecX& q,
                                                     const std::vector<Mat6X>& partials) {
  const Mat6X jac = jacobian_world(model, q);
  Eigen::JacobiSVD<MatX> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int k = std::min(model.dof(), 6) - 1;
  const VecX& s = svd.singularValues();
  ManipulabilityLinearization out;
  out.value = s(k);
  out.well_separated = k == 0 || s(k - 1) - s(k) > 1e-6;
  const Vec6 u = svd.matrixU().col(k);
  const VecX v = svd.matrixV().col(k);
  out.gradient.resize(model.dof());
  for (int j = 0; j < model.dof(); ++j) out.gradient(j) = u.dot(partials[j] * v);
  return out;
}

}  // namespace

AdaptationProblem build_problem(const std::vector<const ArmModel*>& models,
                                const DesiredState& x_d, const std::vector<Pose>& targets,
                                const AdaptationConfig& config) {
  const int arms = static_cast<int>(models.size());
  if (arms < 1 || arms > 2) throw std::invalid_argument("build_problem: 1 or 2 arms supported");
  if (static_cast<int>(x_d.q.size()) != arms || static_cast<int>(x_d.h_d.size()) != arms ||
      static_cast<int>(targets.size()) != arms) {
    throw std::invalid_argument("build_problem: per-arm inputs have inconsistent counts");
  }
  if (config.grasp && arms != 2) {
    throw std::invalid_argument("build_problem: grasp constraints need two arms");
  }

  AdaptationProblem p;
  p.x_d = x_d;
  std::vector<int> offset;
  for (int a = 0; a < arms; ++a) {
    if (x_d.q[a].size() != models[a]->dof()) {
      throw std::invalid_argument("build_problem: q dimension mismatch");
    }
    offset.push_back(p.num_q());
    p.dofs.push_back(models[a]->dof());
  }
  const int nq = p.num_q();
  const int nv = p.num_vars();
  auto h_col = [&](int arm) { return nq + 6 * arm; };

  const CostWeights& w = config.weights;
  RowBuilder cost{{}, {}, {}, nv};
  std::vector<Pose> tools(arms);

  for (int a = 0; a < arms; ++a) {
    const ArmModel& m = *models[a];
    tools[a] = forward_kinematics(m, x_d.q[a]);
    const Mat6X jac = jacobian_world(m, x_d.q[a]);
    const Vec6 err = pose_error(targets[a], tools[a]);
    for (int r = 0; r < 6; ++r) {
      VecX row = VecX::Zero(nv);
      row.segment(offset[a], m.dof()) = jac.row(r).transpose();
      cost.add(row, err(r), r < 3 ? w.task_ang : w.task_lin);
    }
  }
  for (int j = 0; j < nq; ++j) {
    VecX row = VecX::Zero(nv);
    row(j) = 1.0;
    cost.add(row, 0.0, w.dq_reg);
  }
  for (int a = 0; a < arms; ++a) {
    const Vec6 target = a < static_cast<int>(config.h_request.size())
                            ? Vec6(config.h_request[a] - x_d.h_d[a])
                            : Vec6::Zero();
    for (int r = 0; r < 6; ++r) {
      VecX row = VecX::Zero(nv);
      row(h_col(a) + r) = 1.0;
      cost.add(row, target(r), w.wrench_reg);
    }
  }

  RowBuilder eq{{}, {}, {}, nv};
  if (config.grasp) {
    const ArmModel& left = *models[0];
    const ArmModel& right = *models[1];
    const Mat6X jr = jacobian_relative(left, right, x_d.q[0], x_d.q[1]);
    const Vec6 rel_err = pose_error(config.grasp->x_r_desired,
                                    relative_pose(left, right, x_d.q[0], x_d.q[1]));
    for (int r = 0; r < 6; ++r) {
      VecX row = VecX::Zero(nv);
      row.head(nq) = jr.row(r).transpose();
      cost.add(row, rel_err(r), r < 3 ? w.relative_ang : w.relative_lin);
    }

    const GraspMatrix g = grasp_matrix(config.grasp->object_pose, {tools[0], tools[1]});
    p.grasp = g;
    p.gravity_wrench = object_gravity_wrench(config.grasp->object_mass, left.gravity);
    Eigen::Matrix<double, 12, 1> h;
    h << x_d.h_d[0], x_d.h_d[1];
    const Vec6 residual = g * h + p.gravity_wrench;
    for (int r = 0; r < 6; ++r) {
      VecX row = VecX::Zero(nv);
      row.tail(12) = g.row(r).transpose();
      eq.add(row, residual(r));
    }
  }

  RowBuilder ineq{{}, {}, {}, nv};
  const LimitMargins& mg = config.margins;
  for (int a = 0; a < arms; ++a) {
    const ArmModel& m = *models[a];
    const VecX& q = x_d.q[a];
    const int n = m.dof();
    for (int j = 0; j < n; ++j) {
      const Joint& jt = m.joints[j];
      VecX row = VecX::Zero(nv);
      row(offset[a] + j) = 1.0;
      ineq.add(row, q(j) - (jt.q_min + mg.q));
      p.ineq_labels.push_back({"q_min", a, j});
      ineq.add(-row, (jt.q_max - mg.q) - q(j));
      p.ineq_labels.push_back({"q_max", a, j});
      const double step = jt.dq_max * mg.dq_fraction * config.dt;
      ineq.add(row, step);
      p.ineq_labels.push_back({"dq_min", a, j});
      ineq.add(-row, step);
      p.ineq_labels.push_back({"dq_max", a, j});
    }

    // Torque box, linearized in q by central differences and exact in h_d.
    // Static torque G(q) + J^T h_d, linearized analytically.
    const Mat6X jac = jacobian_world(m, q);
    const std::vector<Mat6X> partials = jacobian_partials(m, q);
    const VecX tau0 = gravity_torque(m, q) + jac.transpose() * x_d.h_d[a];
    MatX dtau_dq = gravity_torque_jacobian(m, q);
    for (int j = 0; j < n; ++j) dtau_dq.col(j) += partials[j].transpose() * x_d.h_d[a];
    for (int j = 0; j < n; ++j) {
      VecX row = VecX::Zero(nv);
      row.segment(offset[a], n) = dtau_dq.row(j).transpose();
      row.segment(h_col(a), 6) = jac.col(j);
      const double lim = m.joints[j].tau_max * mg.tau_fraction;
      ineq.add(row, tau0(j) + lim);
      p.ineq_labels.push_back({"tau_min", a, j});
      ineq.add(-row, lim - tau0(j));
      p.ineq_labels.push_back({"tau_max", a, j});
    }

    const ManipulabilityLinearization ml = linearize_manipulability(m, q, partials);
    if (ml.well_separated) {
      VecX row = VecX::Zero(nv);
      row.segment(offset[a], n) = ml.gradient;
      // Below the floor, ask for no more recovery than half of what the
      // velocity box allows this tick, so the row stays satisfiable.
      double reach = 0.0;
      for (int j = 0; j < n; ++j) {
        reach += std::abs(ml.gradient(j)) * m.joints[j].dq_max * mg.dq_fraction * config.dt;
      }
      ineq.add(row, std::max(ml.value - mg.manipulability_floor, -0.5 * reach));
      p.ineq_labels.push_back({"manipulability", a, -1});
    } else {
      // Repeated singular values: the gradient is unreliable, damp instead.
      for (int j = 0; j < n; ++j) {
        VecX row = VecX::Zero(nv);
        row(offset[a] + j) = 1.0;
        cost.add(row, 0.0, w.task_lin * mg.manipulability_floor * mg.manipulability_floor);
      }
    }
  }

  p.c_cost = cost.matrix();
  p.c_cost_rhs = cost.vector(cost.rhs);
  p.weights = cost.vector(cost.weights);
  p.c_eq = eq.rows.empty() ? MatX(0, nv) : eq.matrix();
  p.c_eq_rhs = eq.vector(eq.rhs);
  p.c_ineq = ineq.matrix();
  p.c_ineq_rhs = ineq.vector(ineq.rhs);
  return p;
}

AdaptationSolution solve_sqp_step(const AdaptationProblem& problem) {
  const QpResult r = solve_qp(problem.to_qp());
  AdaptationSolution sol;
  sol.kkt_residual = r.kkt_residual;
  sol.active_set_size = static_cast<int>(r.active_in.size());
  if (r.status != QpStatus::Optimal) {
    sol.status = AdaptationStatus::Infeasible;
    sol.delta = VecX::Zero(problem.num_vars());
    return sol;
  }
  sol.delta = r.x;
  sol.status = r.active_in.empty() ? AdaptationStatus::Optimal : AdaptationStatus::ClampedFeasible;
  return sol;
}

DesiredState apply_solution(const std::vector<const ArmModel*>& models, const DesiredState& x_d,
                            const AdaptationProblem& problem, const AdaptationSolution& sol) {
  if (sol.status == AdaptationStatus::Infeasible) {
    throw std::invalid_argument("apply_solution: infeasible solution cannot be applied");
  }
  if (sol.delta.size() != problem.num_vars()) {
    throw std::invalid_argument("apply_solution: solution size mismatch");
  }
  DesiredState out = x_d;
  int off = 0;
  for (std::size_t a = 0; a < models.size(); ++a) {
    const int n = models[a]->dof();
    out.q[a] = (x_d.q[a] + sol.delta.segment(off, n))
                   .cwiseMax(models[a]->q_min())
                   .cwiseMin(models[a]->q_max());
    off += n;
  }
  for (std::size_t a = 0; a < models.size(); ++a) {
    out.h_d[a] = x_d.h_d[a] + sol.delta.segment(off, 6);
    off += 6;
  }
  return out;
}

VecX desired_increment(const AdaptationProblem& problem) {
  const QpProblem qp = problem.to_qp();
  const int n = qp.num_vars();
  const int m = static_cast<int>(qp.a_eq.rows());
  MatX kkt = MatX::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = qp.hessian;
  if (m > 0) {
    kkt.topRightCorner(n, m) = qp.a_eq.transpose();
    kkt.bottomLeftCorner(m, n) = qp.a_eq;
  }
  VecX rhs(n + m);
  rhs.head(n) = -qp.gradient;
  if (m > 0) rhs.tail(m) = -qp.b_eq;
  return kkt.fullPivLu().solve(rhs).head(n);
}

}  // namespace fic
