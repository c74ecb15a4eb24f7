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

#include <array>
#include <span>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fic {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Rigid transform. Rotation is kept as a unit quaternion.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {Eigen::Quaterniond::Identity(), t}; }
  static Pose from_rotation(const Eigen::Quaterniond& q) { return {q.normalized(), Vec3::Zero()}; }

  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }

  /// Flat layout used in telemetry: [qw, qx, qy, qz, tx, ty, tz].
  std::array<double, 7> to_array() const;
  static Pose from_array(std::span<const double> a);
};

/// Spatial velocity, angular part first. Both parts are expressed in the base frame.
struct Twist {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  static Twist zero() { return {}; }
  Vec6 vector() const;
  static Twist from_vector(const Vec6& v);
};

enum class Frame { Base, Master, Object };

std::string_view frame_name(Frame f);

/// Force-torque pair, torque first. The frame tag is checked where wrenches are combined.
struct Wrench {
  Vec3 torque = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  Frame frame = Frame::Base;

  static Wrench zero(Frame f = Frame::Base) { return {Vec3::Zero(), Vec3::Zero(), f}; }
  Vec6 vector() const;
  static Wrench from_vector(const Vec6& v, Frame f = Frame::Base);
  bool finite() const { return torque.allFinite() && force.allFinite(); }
};

Wrench operator+(const Wrench& a, const Wrench& b);
Wrench operator-(const Wrench& a, const Wrench& b);
Wrench operator*(double s, const Wrench& w);

Mat3 skew(const Vec3& v);

/// Rotation by angle |w| about w/|w|.
Eigen::Quaterniond so3_exp(const Vec3& w);
/// Rotation vector of q. Sign is canonicalized to a non-negative scalar part first.
Vec3 so3_log(const Eigen::Quaterniond& q);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& a);

/// Advances x by a base-frame twist held constant for dt seconds.
Pose integrate_twist(const Pose& x, const Twist& v, double dt);

/// Error (desired - actual) as [angular; linear]. The angular part is the
/// rotation vector of R_desired * R_actual^T, so it lives in the base frame.
Vec6 pose_error(const Pose& desired, const Pose& actual);

}  // namespace fic
