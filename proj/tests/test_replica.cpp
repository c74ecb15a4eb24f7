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
#include "fic/motion_adaptation.hpp"
#include "fic/replica_station.hpp"
#include "test_models.hpp"

using namespace fic;
using namespace fic::testing;

namespace {

const DefaultGains kGains;

Wrench base_force(const Vec3& f) {
  Wrench w;
  w.force = f;
  return w;
}

NlpdController task_controller() {
  return NlpdController(make_nlpd6(kGains.ang, kGains.lin, kGains.xi));
}

}  // namespace

TEST_CASE("interaction estimate") {
  const Wrench h = base_force({5, 0, 0});
  CHECK(estimate_interaction(h, h).vector().norm() == 0.0);
  CHECK((estimate_interaction(h, Wrench::zero()).force - Vec3(5, 0, 0)).norm() == 0.0);
  CHECK_THROWS_AS(estimate_interaction(h, Wrench::zero(Frame::Master)), std::invalid_argument);
}

TEST_CASE("bimanual estimate: a pure squeeze carries no net interaction") {
  const std::array<Pose, 2> tools{Pose::from_translation({-0.1, 0, 0.3}),
                                  Pose::from_translation({0.1, 0, 0.3})};
  const Pose object = Pose::from_translation({0, 0, 0.3});
  const GraspMatrix g = grasp_matrix(object, tools);
  const Wrench h = estimate_interaction_bimanual(g, base_force({-15, 0, 0}),
                                                 base_force({15, 0, 0}), Vec6::Zero());
  CHECK(h.vector().norm() < 1e-12);
  CHECK(h.frame == Frame::Object);

  // Holding a weight: each sensor feels half of it pulling down.
  const Vec6 w = object_gravity_wrench(0.2, Vec3(0, 0, -9.81));
  const Wrench held = estimate_interaction_bimanual(g, base_force({-15, 0, -0.981}),
                                                    base_force({15, 0, -0.981}), w);
  CHECK(held.vector().norm() < 1e-12);
}

TEST_CASE("admittance step examples") {
  const double dt = 1e-3;
  AdmittanceState s;
  s.enabled = true;
  const AdmittanceState still = admittance_step(s, Wrench::zero(), Wrench::zero(), dt);
  CHECK(still.v_f.vector().norm() == 0.0);
  CHECK(pose_error(still.x_f, s.x_f).norm() == 0.0);

  s.m_inv.tail<3>().setConstant(0.1);  // 10 kg
  const AdmittanceState pushed = admittance_step(s, base_force({5, 0, 0}), Wrench::zero(), dt);
  CHECK(pushed.v_f.linear.x() == doctest::Approx(0.0005).epsilon(1e-12));

  s.dv_max.tail<3>().setConstant(0.002);
  const AdmittanceState clamped = admittance_step(s, base_force({1e4, 0, 0}), Wrench::zero(), dt);
  CHECK(clamped.v_f.linear.x() == 0.002);
  const AdmittanceState neg = admittance_step(s, base_force({-1e4, 0, 0}), Wrench::zero(), dt);
  CHECK(neg.v_f.linear.x() == -0.002);

  SUBCASE("disabled admittance resets the offset") {
    AdmittanceState moved = pushed;
    moved.x_f = Pose::from_translation({0.02, 0, 0});
    moved.enabled = false;
    const AdmittanceState r = admittance_step(moved, base_force({5, 0, 0}), Wrench::zero(), dt);
    CHECK(pose_error(r.x_f, Pose::identity()).norm() == 0.0);
    CHECK(r.v_f.vector().norm() == 0.0);
  }
  SUBCASE("per-axis increment never exceeds the clamp") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 200.0);
    AdmittanceState a = s;
    for (int i = 0; i < 5000; ++i) {
      Wrench h = base_force({n(rng), n(rng), n(rng)});
      h.torque = Vec3(n(rng), n(rng), n(rng)) * 0.1;
      const AdmittanceState next = admittance_step(a, h, Wrench::zero(), dt);
      const Vec6 dv = (next.v_f.vector() - a.v_f.vector()).cwiseAbs();
      CHECK((dv.array() <= a.dv_max.array() * (1.0 + 1e-12)).all());
      a = next;
    }
  }
}

TEST_CASE("command fusion") {
  const Pose x_d = Pose::from_translation({0.3, 0.0, 0.2});
  CHECK(pose_error(fuse_command(x_d, Pose::identity()), x_d).norm() == 0.0);
  const Pose f = Pose::from_translation({0, 0.01, 0});
  CHECK((fuse_command(Pose::identity(), f).translation - Vec3(0, 0.01, 0)).norm() == 0.0);
  const Pose all = fuse_command(x_d, f, Pose::from_translation({0, 0, -0.05}));
  CHECK((all.translation - Vec3(0.3, 0.01, 0.15)).norm() < 1e-15);
}

TEST_CASE("replica torque examples") {
  const ArmModel m = chain3();
  const ArmState s = ArmState::at_rest((VecX(3) << 0.2, -0.5, 0.9).finished());
  const Pose x = forward_kinematics(m, s.q);
  ReplicaCommand cmd{x, Wrench::zero(), s.q};

  NlpdController ctl = task_controller();
  const TorqueBreakdown rest = replica_torque(m, s, cmd, ctl, kGains.joint);
  const VecX g = dynamics_terms(m, s).gravity;
  CHECK((rest.total - g).norm() == 0.0);
  CHECK_FALSE(rest.any_saturated());

  ctl.reset();
  cmd.x_delta = compose(Pose::from_translation({0.04, 0, 0}), x);
  const TorqueBreakdown task = replica_torque(m, s, cmd, ctl, kGains.joint);
  const VecX expected = g + jacobian_world(m, s.q).transpose() * base_force({20, 0, 0}).vector();
  CHECK((task.total - expected).norm() < 1e-9);

  SUBCASE("dimension mismatch") {
    ReplicaCommand bad = cmd;
    bad.q_d = VecX::Zero(2);
    CHECK_THROWS_AS(replica_torque(m, s, bad, ctl, kGains.joint), std::invalid_argument);
  }
}

TEST_CASE("torque terms superpose exactly") {
  std::mt19937_64 rng(31);
  const ArmModel m = random_arm(rng, 7);
  for (int i = 0; i < 50; ++i) {
    const ArmState s{random_q(rng, 7), random_q(rng, 7, 0.5)};
    ReplicaCommand cmd{compose(random_pose(rng, 0.02), forward_kinematics(m, s.q)),
                       base_force({1.0, -2.0, 0.5}), s.q + random_q(rng, 7, 0.1)};
    RelativeTerm rel{jacobian_world(m, s.q),
                     random_pose(rng, 0.02), Pose::identity(), Twist::zero(),
                     make_pd6(kGains.rel_ang, kGains.rel_lin)};

    auto run = [&](TorqueSwitches sw) {
      NlpdController ctl = task_controller();
      ReplicaTorqueOptions opt;
      opt.switches = sw;
      return replica_torque(m, s, cmd, ctl, kGains.joint, rel, opt);
    };
    const TorqueBreakdown all = run({});
    CHECK((all.unsaturated - all.coriolis - all.gravity - all.joint_pd - all.interaction -
           all.task - all.relative)
              .norm() < 1e-12);
    const TorqueBreakdown no_pd = run({false, true, true});
    CHECK((all.unsaturated - no_pd.unsaturated - all.joint_pd).norm() < 1e-12);
    const TorqueBreakdown no_h = run({true, false, true});
    CHECK((all.unsaturated - no_h.unsaturated - all.interaction).norm() < 1e-12);
    const TorqueBreakdown no_rel = run({true, true, false});
    CHECK((all.unsaturated - no_rel.unsaturated - all.relative).norm() < 1e-12);
  }
}

TEST_CASE("zero relative error adds nothing") {
  const ArmModel m = chain3();
  const ArmState s = ArmState::at_rest((VecX(3) << 0.1, 0.4, -0.3).finished());
  const ReplicaCommand cmd{forward_kinematics(m, s.q), Wrench::zero(), s.q};
  const Pose xr = Pose::from_translation({0.2, 0, 0});
  const RelativeTerm rel{jacobian_world(m, s.q), xr, xr, Twist::zero(),
                         make_pd6(kGains.rel_ang, kGains.rel_lin)};
  NlpdController a = task_controller(), b = task_controller();
  CHECK((replica_torque(m, s, cmd, a, kGains.joint, rel).total -
         replica_torque(m, s, cmd, b, kGains.joint).total)
            .norm() == 0.0);
}

TEST_CASE("torque saturation is flagged") {
  ArmModel m = chain3();
  for (Joint& j : m.joints) j.tau_max = 1.0;
  const ArmState s = ArmState::at_rest((VecX(3) << 0.0, 0.0, 0.0).finished());
  NlpdController ctl = task_controller();
  const ReplicaCommand cmd{forward_kinematics(m, s.q), Wrench::zero(), s.q};
  const TorqueBreakdown t = replica_torque(m, s, cmd, ctl, kGains.joint);
  CHECK(t.any_saturated());
  CHECK(t.total.cwiseAbs().maxCoeff() <= 1.0);
}
