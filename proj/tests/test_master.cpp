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

#include <random>

#include "doctest.h"
#include "fic/master_station.hpp"
#include "test_models.hpp"

using namespace fic;

namespace {

const DefaultGains kGains;
NlpdParams6 haptic_params() { return make_nlpd6(kGains.ang, kGains.lin, kGains.xi); }

Wrench master_force(const Vec3& f) {
  Wrench w = Wrench::zero(Frame::Master);
  w.force = f;
  return w;
}

}  // namespace

TEST_CASE("master transform examples") {
  MasterState s;
  const Pose x_d0 = Pose::from_translation({0.4, 0.1, 0.3});
  CHECK(pose_error(master_transform(MasterMode::position(x_d0), s, 1e-3), x_d0).norm() == 0.0);

  s.x_d_prev = x_d0;
  s.v_m = Twist::zero();
  CHECK(pose_error(master_transform(MasterMode::velocity(), s, 1e-3), x_d0).norm() == 0.0);

  s.v_m = Twist{Vec3::Zero(), Vec3(0.1, 0, 0)};
  const Pose moved = master_transform(MasterMode::velocity(), s, 1e-3);
  CHECK((moved.translation - x_d0.translation - Vec3(1e-4, 0, 0)).norm() < 1e-15);
  CHECK(pose_error(s.x_d_prev, moved).norm() == 0.0);

  CHECK_THROWS_AS(master_transform(MasterMode::velocity(), s, 0.0), std::invalid_argument);
}

TEST_CASE("master haptics examples") {
  const WorkspaceLimits at_home{0.0, 0.0};
  NlpdStates6 states{};
  MasterState s;
  CHECK(master_haptics(haptic_params(), states, s, Wrench::zero(Frame::Master), at_home)
            .vector()
            .norm() == 0.0);

  s.k_h = 1.0;
  const Wrench pass =
      master_haptics(haptic_params(), states, s, master_force({5, 0, 0}), at_home);
  CHECK((pass.force - Vec3(5, 0, 0)).norm() == 0.0);

  states = {};
  s.k_h = 0.5;
  s.x_m = Pose::from_translation({-0.04, 0, 0});
  const Wrench sum = master_haptics(haptic_params(), states, s, master_force({10, 0, 0}), at_home);
  CHECK((sum.force - Vec3(25, 0, 0)).norm() < 1e-9);
  CHECK(sum.frame == Frame::Master);

  CHECK_THROWS_AS(master_haptics(haptic_params(), states, s, Wrench::zero(Frame::Base)),
                  std::invalid_argument);
}

TEST_CASE("workspace radius delays the virtual pull") {
  NlpdStates6 states{};
  MasterState s;
  s.x_m = Pose::from_translation({0.08, 0, 0});
  s.v_m = Twist{Vec3::Zero(), Vec3(0.3, 0, 0)};
  const WorkspaceLimits limits{0.10, 0.5};
  CHECK(master_haptics(haptic_params(), states, s, Wrench::zero(Frame::Master), limits)
            .vector()
            .norm() == 0.0);
  s.x_m = Pose::from_translation({0.14, 0, 0});
  s.v_m = Twist::zero();
  const Wrench out =
      master_haptics(haptic_params(), states, s, Wrench::zero(Frame::Master), limits);
  CHECK(out.force.x() == doctest::Approx(-20.0));
}

TEST_CASE("haptics are linear in the remote wrench") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 100; ++i) {
    MasterState s;
    s.x_m = testing::random_pose(rng, 0.2);
    s.k_h = 0.7;
    const Wrench h = master_force({u(rng), u(rng), u(rng)});
    NlpdStates6 a{}, b{}, c{};
    const Vec6 base =
        master_haptics(haptic_params(), a, s, Wrench::zero(Frame::Master)).vector();
    const Vec6 once = master_haptics(haptic_params(), b, s, h).vector() - base;
    const Vec6 twice = master_haptics(haptic_params(), c, s, 2.0 * h).vector() - base;
    CHECK((twice - 2.0 * once).norm() < 1e-12);
  }
}

TEST_CASE("haptic gain clamp") {
  MasterState s;
  CHECK(set_haptic_gain(s, 1.4).k_h == 1.0);
  CHECK(set_haptic_gain(s, -0.2).k_h == 0.0);
  CHECK(set_haptic_gain(s, 0.5).k_h == 0.5);
}

TEST_CASE("mode switches never teleport the command") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::bernoulli_distribution flip(0.05);
  const double dt = 1e-3;
  for (int trial = 0; trial < 20; ++trial) {
    const Pose start = testing::random_pose(rng, 0.5);
    MasterStation station(haptic_params(), {}, start);
    Pose device = testing::random_pose(rng, 0.05);
    station.command(device, Twist::zero(), dt);
    // First Position tick composes the raw device pose; re-enter to zero it.
    station.set_mode(MasterModeKind::Velocity);
    station.set_mode(MasterModeKind::Position);
    Pose prev = station.command(device, Twist::zero(), dt);
    for (int k = 0; k < 2000; ++k) {
      if (flip(rng)) {
        station.set_mode(station.mode().kind == MasterModeKind::Position
                             ? MasterModeKind::Velocity
                             : MasterModeKind::Position);
      }
      const Twist v{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)) * 0.2};
      const Pose next_device = integrate_twist(device, v, dt);
      const Vec6 device_step = pose_error(next_device, device);
      const Pose cmd = station.command(next_device, v, dt);
      const Vec6 cmd_step = pose_error(cmd, prev);
      CHECK(cmd_step.tail<3>().norm() <= device_step.tail<3>().norm() + 1e-12);
      CHECK(cmd_step.head<3>().norm() <= device_step.head<3>().norm() + 1e-12);
      device = next_device;
      prev = cmd;
    }
  }
}
