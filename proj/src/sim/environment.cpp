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

#include "fic/sim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fic::sim {

std::pair<double, Vec3> SoftSurface::surface(const Vec3& p) const {
  double s = (p - cfg_.point).dot(cfg_.normal);
  Vec3 grad = cfg_.normal;
  for (const Bump& b : cfg_.bumps) {
    const double dx = p.x() - b.x, dy = p.y() - b.y;
    const double s2 = b.sigma * b.sigma;
    const double g = b.height * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
    s -= g;
    grad += Vec3(g * dx / s2, g * dy / s2, 0.0);
  }
  return {s, grad.normalized()};
}

std::vector<Wrench> SoftSurface::wrenches(double, const std::vector<ToolState>& tools) {
  std::vector<Wrench> out(tools_, Wrench::zero());
  energy_ = 0.0;
  load_ = 0.0;
  const auto [height, n] = surface(tools.front().pose.translation);
  if (height >= 0.0) return out;
  const double depth = -height;
  const Vec3& v = tools.front().twist.linear;
  const double vn = v.dot(n);
  const double normal = std::max(0.0, cfg_.stiffness * std::pow(depth, cfg_.exponent) -
                                          cfg_.damping * vn);
  out.front().force = normal * n - cfg_.tangential_damping * (v - vn * n);
  energy_ = cfg_.stiffness * std::pow(depth, cfg_.exponent + 1.0) / (cfg_.exponent + 1.0);
  load_ = normal;
  return out;
}

Vec3 HumanPartner::scripted(double t) const {
  const auto& p = cfg_.profile;
  if (t <= p.front().t) return p.front().force;
  if (t >= p.back().t) return p.back().force;
  const auto it = std::upper_bound(p.begin(), p.end(), t,
                                   [](double v, const ForceKey& k) { return v < k.t; });
  const ForceKey& b = *it;
  const ForceKey& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return (1.0 - s) * a.force + s * b.force;
}

std::vector<Wrench> HumanPartner::wrenches(double t, const std::vector<ToolState>& tools) {
  std::vector<Wrench> out(tools_, Wrench::zero());
  const Vec3 offset = tools.front().pose.translation - anchor_;
  out.front().force =
      scripted(t) - cfg_.k_hand * offset - cfg_.b_hand * tools.front().twist.linear;
  energy_ = 0.5 * cfg_.k_hand * offset.squaredNorm();
  load_ = out.front().force.norm();
  return out;
}

std::vector<Wrench> BrittleObject::wrenches(double, const std::vector<ToolState>& tools) {
  if (tools.size() != 2) throw std::invalid_argument("brittle object needs two tools");
  std::vector<Wrench> out(2, Wrench::zero());
  energy_ = 0.0;
  load_ = 0.0;
  if (broken_) return out;
  const Vec3 span = tools[1].pose.translation - tools[0].pose.translation;
  const double dist = span.norm();
  const double squeeze = std::max(0.0, rest_ - dist);
  const double force = cfg_.stiffness * squeeze;
  if (force > cfg_.break_force) {
    broken_ = true;
    return out;
  }
  const Vec3 u = dist > 0.0 ? Vec3(span / dist) : Vec3::UnitY();
  const Vec3 weight = 0.5 * cfg_.mass * gravity_;
  out[0].force = -force * u + weight;
  out[1].force = force * u + weight;
  energy_ = 0.5 * cfg_.stiffness * squeeze * squeeze;
  load_ = force;
  return out;
}

std::unique_ptr<Environment> make_environment(const EnvironmentConfig& cfg,
                                              const std::vector<ToolState>& initial,
                                              const Vec3& gravity) {
  const std::size_t n = initial.size();
  if (const auto* s = std::get_if<SoftSurfaceConfig>(&cfg)) {
    return std::make_unique<SoftSurface>(*s, n);
  }
  if (const auto* h = std::get_if<HumanPartnerConfig>(&cfg)) {
    return std::make_unique<HumanPartner>(*h, initial.front().pose.translation, n);
  }
  if (const auto* b = std::get_if<BrittleConfig>(&cfg)) {
    if (n != 2) throw std::invalid_argument("brittle object needs two arms");
    const double start = (initial[1].pose.translation - initial[0].pose.translation).norm();
    return std::make_unique<BrittleObject>(*b, b->length.value_or(start), gravity);
  }
  return std::make_unique<NoEnvironment>(n);
}

}  // namespace fic::sim
