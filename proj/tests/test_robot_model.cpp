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

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "fic/robot_model.hpp"
#include "test_models.hpp"

using namespace fic;
using namespace fic::testing;

namespace {

// Product-of-exponentials FK built only from the zero-configuration geometry.
Eigen::Matrix4d poe_fk(const ArmModel& m, const VecX& q) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  std::vector<Vec3> axes, points;
  for (const Joint& j : m.joints) {
    Eigen::Matrix4d off = Eigen::Matrix4d::Identity();
    off.topLeftCorner<3, 3>() = j.parent_offset.rotation.toRotationMatrix();
    off.topRightCorner<3, 1>() = j.parent_offset.translation;
    t = t * off;
    axes.push_back(t.topLeftCorner<3, 3>() * j.axis);
    points.push_back(t.topRightCorner<3, 1>());
  }
  Eigen::Matrix4d home = t;
  Eigen::Matrix4d tool = Eigen::Matrix4d::Identity();
  tool.topLeftCorner<3, 3>() = m.tool_offset.rotation.toRotationMatrix();
  tool.topRightCorner<3, 1>() = m.tool_offset.translation;
  home = home * tool;

  Eigen::Matrix4d prod = Eigen::Matrix4d::Identity();
  for (int i = 0; i < m.dof(); ++i) {
    Eigen::Matrix4d e = Eigen::Matrix4d::Identity();
    const Mat3 r = Eigen::AngleAxisd(q(i), axes[i]).toRotationMatrix();
    e.topLeftCorner<3, 3>() = r;
    e.topRightCorner<3, 1>() = (Mat3::Identity() - r) * points[i];
    prod = prod * e;
  }
  return prod * home;
}

Mat6X fd_jacobian(const ArmModel& m, const VecX& q, double h) {
  Mat6X j(6, m.dof());
  for (int k = 0; k < m.dof(); ++k) {
    VecX qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    j.col(k) = pose_error(forward_kinematics(m, qp), forward_kinematics(m, qm)) / (2 * h);
  }
  return j;
}

double total_energy(const ArmModel& m, const ArmState& s) {
  return kinetic_energy(m, s) + potential_energy(m, s.q);
}

}  // namespace

TEST_CASE("forward kinematics of a planar two-link arm") {
  const ArmModel m = planar(2, 0.5);
  CHECK(forward_kinematics(m, VecX::Zero(2)).translation.isApprox(Vec3(1.0, 0, 0), 1e-15));
  const Pose up = forward_kinematics(m, (VecX(2) << std::numbers::pi / 2, 0).finished());
  CHECK((up.translation - Vec3(0, 1.0, 0)).norm() < 1e-15);
}

TEST_CASE("forward kinematics matches a product-of-exponentials oracle") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const ArmModel m = random_arm(rng, 7);
    for (int i = 0; i < 10; ++i) {
      const VecX q = random_q(rng, 7);
      const Pose x = forward_kinematics(m, q);
      const Eigen::Matrix4d oracle = poe_fk(m, q);
      CHECK((x.rotation_matrix() - oracle.topLeftCorner<3, 3>()).norm() < 1e-10);
      CHECK((x.translation - oracle.topRightCorner<3, 1>()).norm() < 1e-10);
    }
  }
}

TEST_CASE("planar Jacobian and finite-difference agreement") {
  const ArmModel m = planar(2, 0.5);
  const Mat6X j = jacobian_world(m, VecX::Zero(2));
  CHECK(j(4, 0) == doctest::Approx(1.0));
  CHECK(j(4, 1) == doctest::Approx(0.5));

  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const ArmModel arm = random_arm(rng, 1 + i % 7);
    const VecX q = random_q(rng, arm.dof());
    CHECK((jacobian_world(arm, q) - fd_jacobian(arm, q, 1e-7)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("joint axis through the tool point has no linear contribution") {
  ArmModel m = planar(2, 0.5);
  // A final roll joint about x with the tool further along the same ray.
  Joint roll = rod(Vec3::UnitX(), Vec3(0.5, 0, 0), 0.2, 0.1);
  m.joints.push_back(roll);
  m.tool_offset = Pose::from_translation(Vec3(0.1, 0, 0));
  const Mat6X j = jacobian_world(m, VecX::Zero(3));
  CHECK(j.col(2).tail<3>().norm() < 1e-15);
  CHECK(j.col(2).head<3>().isApprox(Vec3::UnitX()));
}

TEST_CASE("relative Jacobian") {
  std::mt19937_64 rng(9);
  SUBCASE("identical arms moving identically have no relative motion") {
    const ArmModel a = random_arm(rng, 6);
    const VecX q = random_q(rng, 6);
    const VecX dq = random_q(rng, 6, 1.0);
    VecX stacked(12);
    stacked << dq, dq;
    CHECK((jacobian_relative(a, a, q, q) * stacked).norm() < 1e-12);
  }
  SUBCASE("finite differences of the relative pose") {
    for (int i = 0; i < 30; ++i) {
      const ArmModel l = random_arm(rng, 1 + i % 7);
      const ArmModel r = random_arm(rng, 1 + (i * 3) % 7);
      const VecX ql = random_q(rng, l.dof()), qr = random_q(rng, r.dof());
      const Mat6X jr = jacobian_relative(l, r, ql, qr);
      const double h = 1e-7;
      for (int k = 0; k < l.dof() + r.dof(); ++k) {
        VecX qlp = ql, qlm = ql, qrp = qr, qrm = qr;
        if (k < l.dof()) {
          qlp(k) += h;
          qlm(k) -= h;
        } else {
          qrp(k - l.dof()) += h;
          qrm(k - l.dof()) -= h;
        }
        const Vec6 fd =
            pose_error(relative_pose(l, r, qlp, qrp), relative_pose(l, r, qlm, qrm)) / (2 * h);
        CHECK((jr.col(k) - fd).cwiseAbs().maxCoeff() < 1e-6);
      }
    }
  }
  SUBCASE("with the left arm frozen the right block is the transported world Jacobian") {
    const ArmModel l = random_arm(rng, 7), r = random_arm(rng, 7);
    const VecX ql = random_q(rng, 7), qr = random_q(rng, 7);
    const Mat3 rlt = forward_kinematics(l, ql).rotation_matrix().transpose();
    const Mat6X jw = jacobian_world(r, qr);
    const Mat6X block = jacobian_relative(l, r, ql, qr).rightCols(7);
    CHECK((block.topRows<3>() - rlt * jw.topRows<3>()).norm() < 1e-12);
    CHECK((block.bottomRows<3>() - rlt * jw.bottomRows<3>()).norm() < 1e-12);
  }
}

TEST_CASE("pendulum gravity load") {
  const ArmModel m = pendulum(1.0, 1.0);
  const DynamicsTerms t = dynamics_terms(m, ArmState::at_rest(VecX::Zero(1)));
  CHECK(std::abs(t.gravity(0) - 4.905) < 1e-9);
  CHECK(t.coriolis.norm() == 0.0);
}

TEST_CASE("mass matrix: symmetric, positive definite, equal to RNEA columns") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const ArmModel m = random_arm(rng, 1 + i % 7);
    const VecX q = random_q(rng, m.dof());
    const MatX mm = mass_matrix(m, q);
    CHECK((mm - mm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(mm.llt().info() == Eigen::Success);
    const VecX zero = VecX::Zero(m.dof());
    for (int k = 0; k < m.dof(); ++k) {
      const VecX col = inverse_dynamics(m, q, zero, VecX::Unit(m.dof(), k), Vec3::Zero());
      CHECK((col - mm.col(k)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("armature adds to the diagonal of M and to the RNEA torque") {
  std::mt19937_64 rng(22);
  ArmModel m = random_arm(rng, 5);
  const VecX q = random_q(rng, 5);
  const MatX bare = mass_matrix(m, q);
  VecX a(5);
  a << 0.3, 0.0, 0.1, 0.05, 0.2;
  for (int j = 0; j < 5; ++j) m.joints[j].armature = a(j);
  const MatX mm = mass_matrix(m, q);
  CHECK((mm - bare - MatX(a.asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  const VecX zero = VecX::Zero(5);
  for (int k = 0; k < 5; ++k) {
    const VecX col = inverse_dynamics(m, q, zero, VecX::Unit(5, k), Vec3::Zero());
    CHECK((col - mm.col(k)).cwiseAbs().maxCoeff() < 1e-10);
  }
  m.joints[1].armature = -0.1;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("gravity torque Jacobian matches central differences") {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 50; ++i) {
    const ArmModel m = random_arm(rng, 1 + i % 7);
    const int n = m.dof();
    const VecX q = random_q(rng, n);
    const VecX zero = VecX::Zero(n);
    const MatX d = gravity_torque_jacobian(m, q);
    const double h = 1e-6;
    for (int j = 0; j < n; ++j) {
      VecX qp = q, qm = q;
      qp(j) += h;
      qm(j) -= h;
      const VecX fd = (inverse_dynamics(m, qp, zero, zero, m.gravity) -
                       inverse_dynamics(m, qm, zero, zero, m.gravity)) / (2 * h);
      CHECK((d.col(j) - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("M-dot minus 2C is skew symmetric along the motion") {
  // With the Coriolis vector only, the usable identity is dq^T (Mdot - 2C) dq = 0,
  // i.e. dq^T Mdot dq = 2 dq^T C(q, dq) dq.
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const ArmModel m = random_arm(rng, 2 + i % 6);
    const VecX q = random_q(rng, m.dof());
    const VecX dq = random_q(rng, m.dof(), 1.0);
    const double h = 1e-6;
    const MatX mdot = (mass_matrix(m, q + h * dq) - mass_matrix(m, q - h * dq)) / (2 * h);
    const VecX c = dynamics_terms(m, {q, dq}).coriolis;
    CHECK(dq.dot(mdot * dq) == doctest::Approx(2.0 * dq.dot(c)).epsilon(1e-6));
  }
}

TEST_CASE("step_dynamics contracts") {
  SUBCASE("gravity compensation holds the arm still") {
    const ArmModel m = chain3();
    ArmState s = ArmState::at_rest((VecX(3) << 0.3, -0.4, 0.7).finished());
    const VecX g = dynamics_terms(m, s).gravity;
    const StepResult r = step_dynamics(m, s, g, Wrench::zero(), 1e-3);
    CHECK((r.state.q - s.q).norm() < 1e-9);
    CHECK(r.state.dq.norm() < 1e-9);
  }
  SUBCASE("constant torque on a single joint") {
    ArmModel m = pendulum(2.0, 0.5);
    m.gravity = Vec3::Zero();
    const double inertia = mass_matrix(m, VecX::Zero(1))(0, 0);
    ArmState s = ArmState::at_rest(VecX::Zero(1));
    const VecX tau = VecX::Constant(1, 0.8);
    for (int i = 0; i < 500; ++i) s = step_dynamics(m, s, tau, Wrench::zero(), 1e-3).state;
    const double expected = 0.8 * 0.5 / inertia;
    CHECK(std::abs(s.dq(0) - expected) / expected < 1e-3);
  }
  SUBCASE("joint limit clamp") {
    ArmModel m = pendulum();
    m.gravity = Vec3::Zero();
    m.joints[0].q_max = 0.1;
    ArmState s = ArmState::at_rest(VecX::Zero(1));
    bool hit = false;
    for (int i = 0; i < 2000; ++i) {
      const StepResult r = step_dynamics(m, s, VecX::Constant(1, 5.0), Wrench::zero(), 1e-3);
      s = r.state;
      hit = hit || r.limited[0];
    }
    CHECK(hit);
    CHECK(s.q(0) == 0.1);
    CHECK(s.dq(0) == 0.0);
  }
  SUBCASE("non-finite torque is rejected") {
    const ArmModel m = pendulum();
    CHECK_THROWS_AS(step_dynamics(m, ArmState::at_rest(VecX::Zero(1)),
                                  VecX::Constant(1, std::nan("")), Wrench::zero(), 1e-3),
                    std::domain_error);
  }
}

TEST_CASE("unactuated chain conserves energy over one second") {
  const ArmModel m = chain3();
  ArmState s{(VecX(3) << 0.2, 0.5, -0.3).finished(), (VecX(3) << 0.5, -0.2, 0.8).finished()};
  const double e0 = total_energy(m, s);
  for (int i = 0; i < 10000; ++i) s = step_dynamics(m, s, VecX::Zero(3), Wrench::zero(), 1e-4).state;
  CHECK(std::abs(total_energy(m, s) - e0) / std::abs(e0) < 1e-3);
}

TEST_CASE("external wrench enters through the Jacobian transpose") {
  ArmModel m = planar(2);
  m.gravity = Vec3::Zero();
  const ArmState s = ArmState::at_rest((VecX(2) << 0.3, 0.6).finished());
  Wrench h;
  h.force = Vec3(1.0, -2.0, 0.0);
  const VecX tau = -jacobian_world(m, s.q).transpose() * h.vector();
  CHECK(forward_dynamics(m, s, tau, h).norm() < 1e-12);
}

TEST_CASE("model validation and dimension errors") {
  ArmModel m = planar(2);
  m.joints[1].q_min = 1.0;
  m.joints[1].q_max = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  CHECK_THROWS_AS(forward_kinematics(planar(2), VecX::Zero(3)), std::invalid_argument);
  ArmModel bad = planar(2);
  bad.joints[0].inertia(0, 0) = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("manipulability uses the task-relevant singular values") {
  const ArmModel m = planar(3, 0.4);
  const VecX bent = (VecX(3) << 0.3, 0.8, -0.6).finished();
  CHECK(manipulability(m, bent) > 0.01);
  CHECK(manipulability(m, VecX::Zero(3)) < 1e-12);  // stretched: rank drops
}
