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

#include "fic/geom.hpp"

#include <cmath>
#include <stdexcept>

namespace fic {

std::array<double, 7> Pose::to_array() const {
  return {rotation.w(), rotation.x(), rotation.y(), rotation.z(),
          translation.x(), translation.y(), translation.z()};
}

Pose Pose::from_array(std::span<const double> a) {
  if (a.size() != 7) throw std::invalid_argument("pose array must have 7 entries");
  Eigen::Quaterniond q(a[0], a[1], a[2], a[3]);
  if (q.norm() < 1e-12) throw std::invalid_argument("pose quaternion has zero norm");
  return {q.normalized(), Vec3(a[4], a[5], a[6])};
}

Vec6 Twist::vector() const {
  Vec6 v;
  v << angular, linear;
  return v;
}

Twist Twist::from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }

std::string_view frame_name(Frame f) {
  switch (f) {
    case Frame::Base: return "base";
    case Frame::Master: return "master";
    case Frame::Object: return "object";
  }
  return "unknown";
}

Vec6 Wrench::vector() const {
  Vec6 v;
  v << torque, force;
  return v;
}

Wrench Wrench::from_vector(const Vec6& v, Frame f) { return {v.head<3>(), v.tail<3>(), f}; }

namespace {
void require_same_frame(const Wrench& a, const Wrench& b) {
  if (a.frame != b.frame) {
    throw std::invalid_argument("wrench frame mismatch: " + std::string(frame_name(a.frame)) +
                                " vs " + std::string(frame_name(b.frame)));
  }
}
}  // namespace

Wrench operator+(const Wrench& a, const Wrench& b) {
  require_same_frame(a, b);
  return {a.torque + b.torque, a.force + b.force, a.frame};
}

Wrench operator-(const Wrench& a, const Wrench& b) {
  require_same_frame(a, b);
  return {a.torque - b.torque, a.force - b.force, a.frame};
}

Wrench operator*(double s, const Wrench& w) { return {s * w.torque, s * w.force, w.frame}; }

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

Eigen::Quaterniond so3_exp(const Vec3& w) {
  const double theta = w.norm();
  const double half = 0.5 * theta;
  double k;  // sin(theta/2) / theta
  if (theta < 1e-8) {
    k = 0.5 - theta * theta / 48.0;
  } else {
    k = std::sin(half) / theta;
  }
  Eigen::Quaterniond q(std::cos(half), k * w.x(), k * w.y(), k * w.z());
  return q.normalized();
}

Vec3 so3_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  const double w = q.w();
  // atan2 keeps theta well conditioned near pi where w -> 0 and s -> 1.
  // Near zero, theta/s is replaced by its series in s.
  double k;
  if (s < 1e-6) {
    k = 2.0 / w * (1.0 - s * s / (3.0 * w * w));
  } else {
    k = 2.0 * std::atan2(s, w) / s;
  }
  return k * v;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = (a.rotation * b.rotation).normalized();
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose inverse(const Pose& a) {
  Pose out;
  out.rotation = a.rotation.conjugate().normalized();
  out.translation = -(out.rotation * a.translation);
  return out;
}

Pose integrate_twist(const Pose& x, const Twist& v, double dt) {
  Pose out;
  out.rotation = (so3_exp(v.angular * dt) * x.rotation).normalized();
  out.translation = x.translation + v.linear * dt;
  return out;
}

Vec6 pose_error(const Pose& desired, const Pose& actual) {
  Vec6 e;
  e.head<3>() = so3_log(desired.rotation * actual.rotation.conjugate());
  e.tail<3>() = desired.translation - actual.translation;
  return e;
}

}  // namespace fic
