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

#include "doctest.h"
#include "fic/geom.hpp"
#include "test_models.hpp"

using namespace fic;
using fic::testing::random_pose;

namespace {

bool pose_near(const Pose& a, const Pose& b, double tol) {
  return pose_error(a, b).norm() < tol;
}

// Quaternion ODE dq/dt = 0.5 [0, w] (x) q for a constant base-frame rate,
// integrated with many small RK4 steps.
Eigen::Quaterniond integrate_quaternion_ode(Eigen::Quaterniond q, const Vec3& w, double t,
                                            int steps) {
  const double h = t / steps;
  auto f = [&](const Eigen::Vector4d& y) {
    const Eigen::Quaterniond qy(y(0), y(1), y(2), y(3));
    const Eigen::Quaterniond wq(0.0, w.x(), w.y(), w.z());
    const Eigen::Quaterniond d = wq * qy;
    return Eigen::Vector4d(0.5 * d.w(), 0.5 * d.x(), 0.5 * d.y(), 0.5 * d.z());
  };
  Eigen::Vector4d y(q.w(), q.x(), q.y(), q.z());
  for (int i = 0; i < steps; ++i) {
    const Eigen::Vector4d k1 = f(y);
    const Eigen::Vector4d k2 = f(y + 0.5 * h * k1);
    const Eigen::Vector4d k3 = f(y + 0.5 * h * k2);
    const Eigen::Vector4d k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return Eigen::Quaterniond(y(0), y(1), y(2), y(3));
}

}  // namespace

TEST_CASE("compose: identity, inverse and commuting translations") {
  CHECK(pose_near(compose(Pose::identity(), Pose::identity()), Pose::identity(), 1e-15));

  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(rng);
    CHECK(pose_near(compose(a, inverse(a)), Pose::identity(), 1e-12));
    CHECK(pose_near(compose(a, Pose::identity()), a, 1e-15));
  }

  const Pose t = compose(Pose::from_translation({0.1, 0, 0}), Pose::from_translation({0, 0.2, 0}));
  CHECK(t.translation.isApprox(Vec3(0.1, 0.2, 0.0), 1e-15));
}

TEST_CASE("compose is associative and keeps unit quaternions") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Pose l = compose(compose(a, b), c);
    const Pose r = compose(a, compose(b, c));
    CHECK(pose_error(l, r).norm() < 1e-12);
    CHECK(std::abs(l.rotation.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("integrate_twist closed forms") {
  const Pose x = Pose::from_translation({0.3, -0.1, 0.2});
  CHECK(pose_near(integrate_twist(x, Twist::zero(), 0.01), x, 1e-15));

  const Pose yaw = integrate_twist(Pose::identity(), {Vec3(0, 0, std::numbers::pi), Vec3::Zero()}, 1.0);
  const Mat3 expected = Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitZ()).toRotationMatrix();
  CHECK((yaw.rotation_matrix() - expected).norm() < 1e-12);
}

TEST_CASE("integrate_twist matches a fine-step quaternion ODE oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const Pose x = random_pose(rng);
    const Twist v{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng))};
    const double dt = 1e-3;
    const Pose next = integrate_twist(x, v, dt);
    Eigen::Quaterniond oracle = integrate_quaternion_ode(x.rotation, v.angular, dt, 100);
    if (oracle.coeffs().dot(next.rotation.coeffs()) < 0) oracle.coeffs() *= -1;
    CHECK((oracle.coeffs() - next.rotation.coeffs()).norm() < 1e-9);
    CHECK((next.translation - (x.translation + v.linear * dt)).norm() < 1e-15);
    CHECK(std::abs(next.rotation.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("pose_error examples") {
  const Pose x = Pose::from_translation({0.2, 0.1, 0.0});
  CHECK(pose_error(x, x).norm() == doctest::Approx(0.0));

  const Pose ahead = Pose::from_translation({0.25, 0.1, 0.0});
  Vec6 expected;
  expected << 0, 0, 0, 0.05, 0, 0;
  CHECK((pose_error(ahead, x) - expected).norm() < 1e-12);

  const Pose yawed{Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ())),
                   Vec3::Zero()};
  const Vec6 e = pose_error(yawed, Pose::identity());
  CHECK((e.head<3>() - Vec3(0, 0, std::numbers::pi / 2)).norm() < 1e-9);
}

TEST_CASE("exp/log round trip and double cover") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Pose x = random_pose(rng);
    Vec3 w(u(rng), u(rng), u(rng));
    w *= (std::numbers::pi - 1e-3) * std::abs(u(rng)) / w.norm();
    const Twist v{w, Vec3(u(rng), u(rng), u(rng))};
    const Vec6 back = pose_error(integrate_twist(x, v, 1.0), x);
    CHECK((back - v.vector()).norm() < 1e-9);

    Pose flipped = x;
    flipped.rotation.coeffs() *= -1;
    const Pose d = random_pose(rng);
    CHECK((pose_error(d, x) - pose_error(d, flipped)).norm() < 1e-14);
  }
}

TEST_CASE("so3_log stays finite near pi and near zero") {
  for (double angle : {std::numbers::pi, std::numbers::pi - 1e-9, 1e-12, 0.0}) {
    const Eigen::Quaterniond q(Eigen::AngleAxisd(angle, Vec3(1, 2, 3).normalized()));
    const Vec3 w = so3_log(q);
    CHECK(w.allFinite());
    CHECK(w.norm() == doctest::Approx(angle).epsilon(1e-9));
  }
}

TEST_CASE("wrench frame tags are checked when combining") {
  const Wrench a = Wrench::zero(Frame::Base);
  const Wrench b = Wrench::zero(Frame::Master);
  CHECK_THROWS_AS(a + b, std::invalid_argument);
  CHECK_NOTHROW(a - a);
}

TEST_CASE("telemetry array layout") {
  const Pose p{Eigen::Quaterniond(0.5, 0.5, 0.5, 0.5), Vec3(1, 2, 3)};
  const auto a = p.to_array();
  CHECK(a[0] == doctest::Approx(0.5));
  CHECK(a[4] == 1.0);
  CHECK(a[6] == 3.0);
  CHECK(pose_error(Pose::from_array(a), p).norm() < 1e-15);
}
