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

#include <memory>
#include <vector>

#include "fic/geom.hpp"
#include "fic/sim/config.hpp"

namespace fic::sim {

struct ToolState {
  Pose pose;
  Twist twist;
};

/// Something the replica tools touch. Evaluated once per plant substep.
class Environment {
 public:
  virtual ~Environment() = default;

  /// Wrench the environment applies on each tool, base frame, about the tool
  /// point. May latch internal state (e.g. a break).
  virtual std::vector<Wrench> wrenches(double t, const std::vector<ToolState>& tools) = 0;

  /// Potential energy held by the environment at the last evaluation (J).
  virtual double stored_energy() const { return 0.0; }
  /// Scalar load for telemetry: normal force, hand force or squeeze (N).
  virtual double load() const { return 0.0; }
  virtual bool broken() const { return false; }
};

class NoEnvironment : public Environment {
 public:
  explicit NoEnvironment(std::size_t tools) : tools_(tools) {}
  std::vector<Wrench> wrenches(double, const std::vector<ToolState>&) override {
    return std::vector<Wrench>(tools_, Wrench::zero());
  }

 private:
  std::size_t tools_;
};

/// Deformable surface under arm 0: k depth^p along the local normal, plus
/// normal and tangential damping while in contact.
class SoftSurface : public Environment {
 public:
  SoftSurface(const SoftSurfaceConfig& cfg, std::size_t tools) : cfg_(cfg), tools_(tools) {}
  std::vector<Wrench> wrenches(double t, const std::vector<ToolState>& tools) override;
  double stored_energy() const override { return energy_; }
  double load() const override { return load_; }

  /// Signed distance-like height of p above the surface (negative inside)
  /// and the outward normal there.
  std::pair<double, Vec3> surface(const Vec3& p) const;

 private:
  SoftSurfaceConfig cfg_;
  std::size_t tools_;
  double energy_ = 0.0;
  double load_ = 0.0;
};

/// A person holding the tool of arm 0 through a compliant hand.
class HumanPartner : public Environment {
 public:
  HumanPartner(const HumanPartnerConfig& cfg, const Vec3& anchor, std::size_t tools)
      : cfg_(cfg), anchor_(anchor), tools_(tools) {}
  std::vector<Wrench> wrenches(double t, const std::vector<ToolState>& tools) override;
  double stored_energy() const override { return energy_; }
  double load() const override { return load_; }

  /// Scripted push at time t, linearly interpolated and held at the ends.
  Vec3 scripted(double t) const;

 private:
  HumanPartnerConfig cfg_;
  Vec3 anchor_;
  std::size_t tools_;
  double energy_ = 0.0;
  double load_ = 0.0;
};

/// Fragile item between the two tool tips. It pushes the tips apart when
/// squeezed below its rest length and hangs half its weight on each tip.
/// Past the break force it breaks for good and applies nothing.
class BrittleObject : public Environment {
 public:
  BrittleObject(const BrittleConfig& cfg, double rest_length, const Vec3& gravity)
      : cfg_(cfg), rest_(rest_length), gravity_(gravity) {}
  std::vector<Wrench> wrenches(double t, const std::vector<ToolState>& tools) override;
  double stored_energy() const override { return energy_; }
  double load() const override { return load_; }
  bool broken() const override { return broken_; }
  double rest_length() const { return rest_; }

 private:
  BrittleConfig cfg_;
  double rest_;
  Vec3 gravity_;
  bool broken_ = false;
  double energy_ = 0.0;
  double load_ = 0.0;
};

std::unique_ptr<Environment> make_environment(const EnvironmentConfig& cfg,
                                              const std::vector<ToolState>& initial,
                                              const Vec3& gravity);

}  // namespace fic::sim
