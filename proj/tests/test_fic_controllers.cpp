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
#include <random>

#include "doctest.h"
#include "fic/fic_controllers.hpp"
#include "nlpd_cycles.hpp"

using namespace fic;

namespace {

const DefaultGains kGains;
const NlpdParams kLin{kGains.lin, kGains.xi};

NlpdAxisState drive(std::initializer_list<double> xs) {
  NlpdAxisState s;
  for (double x : xs) s = nlpd_update_phase(s, x);
  return s;
}

NlpdAxisState converging(double x_max, double x) { return drive({x_max, x}); }

}  // namespace

TEST_CASE("saturated PD") {
  CHECK(pd_force(kGains.joint, 0.3, 0.3, 0.0) == 0.0);
  CHECK(pd_force(kGains.joint, deg2rad(5.0), 0.0, 0.0) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(pd_force(kGains.joint, deg2rad(20.0), 0.0, 0.0) == 0.3);
  CHECK(pd_force(kGains.joint, -deg2rad(20.0), 0.0, 0.0) == -0.3);

  const PdParams damped{40.0, 0.08, 0.8};
  CHECK(damped.kp() == doctest::Approx(500.0));
  CHECK(damped.kd() == doctest::Approx(2 * 0.8 * std::sqrt(500.0)));
  CHECK(pd_force(damped, 0.0, 0.0, 0.1) == doctest::Approx(-0.1 * damped.kd()));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 1000; ++i) {
    const double e = u(rng);
    CHECK(pd_force(damped, -e, 0.0, 0.0) == -pd_force(damped, e, 0.0, 0.0));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((PdParams{0.0, 1.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PdParams{1.0, -1.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PdParams{1.0, 1.0, -0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NlpdParams{kGains.lin, 1.0}.validate()), std::invalid_argument);
  CHECK_NOTHROW(kLin.validate());
  CHECK(kLin.e_max() > kLin.e0());
}

TEST_CASE("phase sequence") {
  NlpdAxisState s;
  for (double x : {0.01, 0.02, 0.03}) {
    s = nlpd_update_phase(s, x);
    CHECK(s.phase == NlpdPhase::Divergence);
  }
  CHECK(s.x_max == 0.03);
  s = nlpd_update_phase(s, 0.025);
  CHECK(s.phase == NlpdPhase::Convergence);
  CHECK(s.x_max == 0.03);
  s = nlpd_update_phase(s, 0.035);
  CHECK(s.phase == NlpdPhase::Divergence);
  CHECK(s.x_max == 0.035);

  SUBCASE("zero crossing resets the cycle") {
    NlpdAxisState z = drive({0.03, 0.01, -0.002});
    CHECK(z.phase == NlpdPhase::Divergence);
    CHECK(z.x_max == 0.002);
  }
  SUBCASE("changes inside the deadband keep the phase") {
    NlpdAxisState d = drive({0.03, 0.03 - 0.5 * kNlpdDeadband});
    CHECK(d.phase == NlpdPhase::Divergence);
    d = drive({0.03, 0.02, 0.02 + 0.5 * kNlpdDeadband});
    CHECK(d.phase == NlpdPhase::Convergence);
  }
}

TEST_CASE("NLPD force examples") {
  NlpdAxisState s;
  CHECK(nlpd_force(kLin, nlpd_update_phase(s, 0.0), 0.0, 0.0, 0.0) == 0.0);
  CHECK(kLin.kp() == doctest::Approx(500.0));
  CHECK(nlpd_spring(kLin, drive({0.04}), 0.04) == doctest::Approx(20.0).epsilon(1e-12));

  const NlpdAxisState c = converging(0.04, 0.02);
  CHECK(c.phase == NlpdPhase::Convergence);
  CHECK(nlpd_spring(kLin, c, 0.02) == 0.0);
  CHECK(std::abs(nlpd_spring(kLin, c, 0.04) - nlpd_spring(kLin, drive({0.04}), 0.04)) < 1e-9);

  const double far = nlpd_spring(kLin, drive({0.2}), 0.2);
  CHECK(far <= kLin.e_max());
  CHECK(far >= 0.99 * kLin.e_max());
  CHECK(nlpd_spring(kLin, drive({1.0}), 1.0) == doctest::Approx(40.0).epsilon(1e-9));
}

TEST_CASE("degenerate convergence returns zero force") {
  NlpdAxisState s;
  s.phase = NlpdPhase::Convergence;
  s.x_max = 0.0;
  CHECK(nlpd_spring(kLin, s, 0.0) == 0.0);
}

TEST_CASE("six-axis wrench examples") {
  NlpdController ctl(make_nlpd6(kGains.ang, kGains.lin, kGains.xi));
  const Wrench zero = ctl.wrench(Pose::identity(), Pose::identity(), Twist::zero());
  CHECK(zero.vector().norm() == 0.0);

  ctl.reset();
  const Wrench fx = ctl.wrench(Pose::from_translation({0.04, 0, 0}), Pose::identity(), Twist::zero());
  CHECK((fx.force - Vec3(20, 0, 0)).norm() < 1e-9);
  CHECK(fx.torque.norm() == 0.0);

  ctl.reset();
  const Pose pitch = Pose::from_rotation(
      Eigen::Quaterniond(Eigen::AngleAxisd(deg2rad(4.0), Vec3::UnitY())));
  const Wrench ty = ctl.wrench(pitch, Pose::identity(), Twist::zero());
  CHECK(ty.torque.norm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ty.force.norm() == 0.0);
}

TEST_CASE("effective stiffness") {
  CHECK(effective_stiffness(kLin, drive({0.01}), 0.01) == doctest::Approx(500.0));
  CHECK(effective_stiffness(kLin, converging(0.04, 0.03), 0.03) == doctest::Approx(1000.0));
  CHECK(effective_stiffness(kLin, drive({0.5}), 0.5) < 1.0);

  // Analytic slope agrees with central differences away from the branch joint.
  for (double x : {0.01, 0.075, 0.078, 0.09, -0.076}) {
    const double h = 1e-8;
    const double fd = (nlpd_profile(kLin, x + h) - nlpd_profile(kLin, x - h)) / (2 * h);
    CHECK(nlpd_profile_slope(kLin, x) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("profile continuity, bound and monotonicity") {
  for (const PdParams& pd : {kGains.lin, kGains.ang, kGains.rel_lin, kGains.rel_ang, kGains.joint}) {
    const NlpdParams p{pd, kGains.xi};
    const double below = nlpd_profile(p, p.x_b());
    const double above = nlpd_profile(p, std::nextafter(p.x_b(), 1e9));
    CHECK(std::abs(above - below) < 0.02 * p.pd.f);

    double prev = 0.0;
    for (int i = 0; i <= 20000; ++i) {
      const double x = 3.0 * p.pd.d * i / 20000.0;
      const double e = nlpd_profile(p, x);
      CHECK(e >= prev);
      CHECK(e <= p.e_max());
      CHECK(nlpd_profile(p, -x) == -e);
      prev = e;
    }
  }
}

TEST_CASE("branch continuity and bound along random trajectories") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const testing::ClosedCycle c = testing::random_cycle(rng, 0.2);
    NlpdAxisState s;
    for (int i = 0; i <= 2000; ++i) {
      const double x = c.at(c.period * i / 2000.0);
      s = nlpd_update_phase(s, x);
      const double f = nlpd_spring(kLin, s, x);
      CHECK(std::abs(f) <= kLin.e_max());
      if (s.phase == NlpdPhase::Convergence) {
        CHECK(std::abs(x) <= s.x_max + 1e-12);
        // Both branches agree at the frozen peak.
        CHECK(std::abs(nlpd_spring(kLin, s, std::copysign(s.x_max, x)) -
                       nlpd_profile(kLin, std::copysign(s.x_max, x))) < 1e-9);
      }
    }
  }
}

TEST_CASE("closed error cycles never inject energy") {
  std::mt19937_64 rng(99);
  for (const PdParams& pd : {kGains.lin, kGains.ang}) {
    const NlpdParams p{pd, kGains.xi};
    for (int i = 0; i < 300; ++i) {
      const testing::ClosedCycle c = testing::random_cycle(rng, 2.0 * pd.d);
      CHECK(testing::cycle_work_on_plant(p, c) <= 1e-6);
    }
  }
}
