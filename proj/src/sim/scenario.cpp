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

#include "fic/sim/scenario.hpp"

#include <cmath>

#include "fic/sim/trace.hpp"

namespace fic::sim {

namespace {

Wrench rotate(const Mat3& r, const Wrench& h, Frame f) {
  return Wrench{r * h.torque, r * h.force, f};
}

std::array<Pose, 2> pair_of(const std::vector<Pose>& v) { return {v[0], v[1]}; }

}  // namespace

Simulation::Simulation(const ScenarioConfig& cfg, InputSource source)
    : cfg_(cfg),
      master_(make_nlpd6(cfg.gains.ang, cfg.gains.lin, cfg.gains.xi), cfg.master.limits,
              Pose::identity()),
      fwd_(cfg.channel.delay_ms / 2000.0, cfg.channel.jitter_ms / 1000.0, cfg.channel.drop_rate,
           cfg.seed * 2 + 1),
      back_(cfg.channel.delay_ms / 2000.0, cfg.channel.jitter_ms / 1000.0, cfg.channel.drop_rate,
            cfg.seed * 2 + 2) {
  if (cfg_.arms.empty() || cfg_.arms.size() > 2) throw ConfigError("scenario needs 1 or 2 arms");
  if (cfg_.bimanual && cfg_.arms.size() != 2) throw ConfigError("bimanual mode needs two arms");
  std::vector<int> dofs;
  for (const ArmEntry& a : cfg_.arms) {
    models_.push_back(&a.model);
    states_.push_back(ArmState::at_rest(a.q0));
    nlpd_.emplace_back(make_nlpd6(cfg_.gains.ang, cfg_.gains.lin, cfg_.gains.xi));
    dofs.push_back(a.model.dof());
  }
  columns_ = record_columns(dofs);
  labels_ = cfg_.window_labels();

  std::vector<Pose> tools;
  for (std::size_t a = 0; a < states_.size(); ++a) {
    tools.push_back(forward_kinematics(*models_[a], states_[a].q));
  }
  Pose command0 = tools.front();
  if (cfg_.bimanual) {
    const Pose obj = object_pose(tools);
    for (const Pose& t : tools) grasp_offsets_.push_back(compose(inverse(obj), t));
    grasp_offsets_[1].translation += cfg_.bimanual->separation_offset;
    x_r_desired_ = compose(inverse(grasp_offsets_[0]), grasp_offsets_[1]);
    command0 = obj;
  }
  master_ = MasterStation(make_nlpd6(cfg_.gains.ang, cfg_.gains.lin, cfg_.gains.xi),
                          cfg_.master.limits, command0);
  received_cmd_ = command0;
  nlpd_target_ = tools;

  input_.k_h = cfg_.master.k_h;
  if (source == InputSource::Script && !cfg_.master.script.empty()) {
    const auto samples = read_master_csv(cfg_.master.script);
    pending_.assign(samples.begin(), samples.end());
    input_ = pending_.front();
  }

  admittance_ = cfg_.admittance;
  admittance_.reset();
  x_D_.q.clear();
  for (const ArmState& s : states_) x_D_.q.push_back(s.q);
  x_D_.h_d = cfg_.bimanual ? wrench_request(tools)
                           : std::vector<Vec6>(states_.size(), Vec6::Zero());

  try {
    env_ = make_environment(cfg_.environment, tool_states(), models_.front()->gravity);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  h_e_ = env_->wrenches(0.0, tool_states());
  energy0_ = mechanical_energy();
  for (std::size_t a = 0; a < states_.size(); ++a) {
    potential0_ += potential_energy(*models_[a], states_[a].q);
  }
}

std::vector<ToolState> Simulation::tool_states() const {
  std::vector<ToolState> out;
  for (std::size_t a = 0; a < states_.size(); ++a) {
    const VecX& q = states_[a].q;
    out.push_back({forward_kinematics(*models_[a], q),
                   Twist::from_vector(jacobian_world(*models_[a], q) * states_[a].dq)});
  }
  return out;
}

Pose Simulation::object_pose(const std::vector<Pose>& tools) const {
  return Pose::from_translation(0.5 * (tools[0].translation + tools[1].translation));
}

std::vector<Vec6> Simulation::wrench_request(const std::vector<Pose>& tools) const {
  // Each tool carries half the weight and presses toward the other one.
  double mass = 0.0;
  if (const auto* b = std::get_if<BrittleConfig>(&cfg_.environment)) mass = b->mass;
  const Vec3 lift = -0.5 * mass * models_.front()->gravity;
  Vec3 u = tools[1].translation - tools[0].translation;
  u = u.norm() > 0.0 ? Vec3(u.normalized()) : Vec3::UnitY();
  const double squeeze = cfg_.bimanual->squeeze;
  Vec6 left = Vec6::Zero(), right = Vec6::Zero();
  left.tail<3>() = lift + squeeze * u;
  right.tail<3>() = lift - squeeze * u;
  return {left, right};
}

Wrench Simulation::object_interaction(const std::vector<Wrench>& h_e) const {
  std::vector<Pose> tools;
  for (std::size_t a = 0; a < states_.size(); ++a) {
    tools.push_back(forward_kinematics(*models_[a], states_[a].q));
  }
  double mass = 0.0;
  if (const auto* b = std::get_if<BrittleConfig>(&cfg_.environment)) {
    if (!env_->broken()) mass = b->mass;
  }
  const GraspMatrix g = grasp_matrix(object_pose(tools), pair_of(tools));
  Wrench w = estimate_interaction_bimanual(g, h_e[0], h_e[1],
                                           object_gravity_wrench(mass, models_.front()->gravity));
  w.frame = Frame::Base;
  return w;
}

double Simulation::mechanical_energy() const {
  double e = 0.0;
  for (std::size_t a = 0; a < states_.size(); ++a) {
    e += kinetic_energy(*models_[a], states_[a]) + potential_energy(*models_[a], states_[a].q);
  }
  return e;
}

void Simulation::push_input(const MasterSample& sample) {
  if (!(sample.t > last_pushed_t_)) throw std::invalid_argument("master input times must increase");
  last_pushed_t_ = sample.t;
  pending_.push_back(sample);
}

const StepRecord& Simulation::step() {
  if (done()) throw std::logic_error("scenario already finished");
  const double dt = cfg_.dt;
  const double t = time();
  const std::size_t arms = states_.size();
  StepRecord& r = record_;
  r.tick = tick_;
  r.t = t;
  r.arms.assign(arms, ArmRecord{});

  // Master side: newest device sample due by now, then the command.
  while (!pending_.empty() && sample_start_tick(pending_.front().t, dt) <= tick_) {
    input_ = pending_.front();
    pending_.pop_front();
  }
  master_.set_mode(input_.mode);
  master_.set_haptic_gain(input_.k_h);
  const Pose x_cmd = master_.command(input_.x_m, input_.v_m, dt);
  fwd_.send({t, x_cmd}, t);
  for (const CommandMsg& m : fwd_.poll(t)) received_cmd_ = m.x_d;

  const std::vector<ToolState> tools = tool_states();
  std::vector<Pose> tool_poses;
  for (const ToolState& s : tools) tool_poses.push_back(s.pose);

  // Admittance on the measured interaction, in the command frame.
  const ScheduleEntry& window = cfg_.window_at(t);
  admittance_.enabled = window.admittance;
  const Wrench h_est = cfg_.bimanual
                           ? object_interaction(h_e_)
                           : estimate_interaction(h_e_[0], Wrench::from_vector(x_D_.h_d[0]));
  const Mat3 r_cmd_t = received_cmd_.rotation_matrix().transpose();
  admittance_ = admittance_step(admittance_, rotate(r_cmd_t, h_est, Frame::Base),
                                Wrench::zero(), dt);
  const Pose x_delta = fuse_command(received_cmd_, admittance_.x_f);

  // Motion adaptation.
  std::vector<Pose> targets;
  if (cfg_.bimanual) {
    for (const Pose& off : grasp_offsets_) targets.push_back(compose(x_delta, off));
  } else {
    targets.push_back(x_delta);
  }
  AdaptationConfig ac;
  ac.weights = cfg_.weights;
  ac.margins = cfg_.margins;
  ac.dt = dt;
  std::vector<Pose> desired_tools;
  for (std::size_t a = 0; a < arms; ++a) {
    desired_tools.push_back(forward_kinematics(*models_[a], x_D_.q[a]));
  }
  if (cfg_.bimanual) {
    double mass = 0.0;
    if (const auto* b = std::get_if<BrittleConfig>(&cfg_.environment)) mass = b->mass;
    ac.grasp = GraspSpec{mass, object_pose(desired_tools), x_r_desired_};
    ac.h_request = wrench_request(desired_tools);
  } else {
    ac.h_request.assign(arms, Vec6::Zero());
  }
  const AdaptationProblem problem = build_problem(models_, x_D_, targets, ac);
  const AdaptationSolution sol = solve_sqp_step(problem);
  if (sol.status != AdaptationStatus::Infeasible) {
    x_D_ = apply_solution(models_, x_D_, problem, sol);
    for (std::size_t a = 0; a < arms; ++a) {
      nlpd_target_[a] = sol.status == AdaptationStatus::Optimal
                            ? targets[a]
                            : forward_kinematics(*models_[a], x_D_.q[a]);
    }
  }
  r.status = sol.status;
  r.kkt_residual = sol.kkt_residual;
  r.active_set = sol.active_set_size;
  r.grasp_residual = 0.0;
  if (problem.grasp) {
    Eigen::Matrix<double, 12, 1> h;
    h << x_D_.h_d[0], x_D_.h_d[1];
    r.grasp_residual = (*problem.grasp * h + problem.gravity_wrench).norm();
  }

  // Replica torques.
  std::optional<RelativeState> rel;
  if (cfg_.bimanual) rel = relative_state(*models_[0], *models_[1], states_[0], states_[1]);
  std::vector<VecX> tau(arms);
  for (std::size_t a = 0; a < arms; ++a) {
    const ReplicaCommand cmd{nlpd_target_[a], Wrench::from_vector(x_D_.h_d[a]), x_D_.q[a]};
    std::optional<RelativeTerm> rt;
    if (rel) {
      const int n0 = models_[0]->dof();
      const Mat6X block = a == 0 ? Mat6X(rel->jacobian.leftCols(n0))
                                 : Mat6X(rel->jacobian.rightCols(models_[1]->dof()));
      rt = RelativeTerm{block, x_r_desired_, rel->x_r, rel->v_r,
                        make_pd6(cfg_.gains.rel_ang, cfg_.gains.rel_lin)};
    }
    const Vec6 stiff = nlpd_[a].stiffness(cmd.x_delta, tool_poses[a]);
    const TorqueBreakdown tb =
        replica_torque(*models_[a], states_[a], cmd, nlpd_[a], cfg_.gains.joint, rt, cfg_.torque);
    tau[a] = tb.total;

    ArmRecord& ar = r.arms[a];
    ar.q = states_[a].q;
    ar.dq = states_[a].dq;
    ar.tau = tb.total;
    ar.x = tool_poses[a];
    ar.h_e = h_e_[a];
    ar.x_delta = cmd.x_delta;
    ar.stiffness = stiff;
    ar.h_d = x_D_.h_d[a];
    ar.manipulability = manipulability(*models_[a], states_[a].q);
    ar.saturated = static_cast<int>(std::count(tb.saturated.begin(), tb.saturated.end(), true));
    ar.track_error = (cmd.x_delta.translation - tool_poses[a].translation).norm();
  }
  if (rel) {
    const Vec6 e = pose_error(x_r_desired_, rel->x_r);
    r.rel_error_ang = e.head<3>().norm();
    r.rel_error_lin = e.tail<3>().norm();
  } else {
    r.rel_error_ang = r.rel_error_lin = 0.0;
  }

  // Energy state at the start of the tick.
  double ke = 0.0, pe = 0.0;
  for (std::size_t a = 0; a < arms; ++a) {
    ke += kinetic_energy(*models_[a], states_[a]);
    pe += potential_energy(*models_[a], states_[a].q);
  }
  r.kinetic = ke;
  r.potential = pe - potential0_;
  r.work_actuators = work_act_;
  r.work_environment = work_env_;
  r.energy_residual = (ke + pe - energy0_) - (work_act_ + work_env_);
  r.work_scale = work_abs_;
  r.env_energy = env_->stored_energy();
  r.env_load = env_->load();
  r.env_broken = env_->broken();

  // Plant, with the environment refreshed every substep.
  const double h = dt / cfg_.substeps;
  std::vector<Wrench> h_sub = h_e_;
  for (int s = 0; s < cfg_.substeps; ++s) {
    if (s > 0) h_sub = env_->wrenches(t + s * h, tool_states());
    for (std::size_t a = 0; a < arms; ++a) {
      const Pose before = forward_kinematics(*models_[a], states_[a].q);
      const VecX q0 = states_[a].q;
      StepResult sr;
      try {
        sr = step_dynamics(*models_[a], states_[a], tau[a], h_sub[a], h);
      } catch (const std::domain_error& e) {
        throw NumericalAbort(tick_, e.what());
      }
      if (!sr.state.q.allFinite() || !sr.state.dq.allFinite()) {
        throw NumericalAbort(tick_, "non-finite joint state on arm " + std::to_string(a));
      }
      states_[a] = sr.state;
      const Pose after = forward_kinematics(*models_[a], states_[a].q);
      const double w_act = tau[a].dot(states_[a].q - q0);
      const double w_env =
          h_sub[a].force.dot(after.translation - before.translation) +
          h_sub[a].torque.dot(so3_log(after.rotation * before.rotation.conjugate()));
      work_act_ += w_act;
      work_env_ += w_env;
      work_abs_ += std::abs(w_act) + std::abs(w_env);
    }
  }

  // Back channel and haptics.
  h_e_ = env_->wrenches(t + dt, tool_states());
  back_.send({t, h_est}, t);
  for (const FeedbackMsg& m : back_.poll(t)) received_feedback_ = m.h;
  const Mat3 r_ref = master_.mode().kind == MasterModeKind::Position
                         ? master_.mode().x_d0.rotation_matrix()
                         : Mat3::Identity();
  r.h_h = master_.haptics(rotate(r_ref.transpose(), received_feedback_, Frame::Master));

  r.mode = master_.mode().kind;
  r.x_m = master_.state().x_m;
  r.x_d = x_cmd;
  r.k_h = master_.state().k_h;
  r.fwd_depth = fwd_.depth();
  r.back_depth = back_.depth();
  r.fwd_dropped = fwd_.stats().dropped;
  r.back_dropped = back_.stats().dropped;
  r.admittance = admittance_.enabled;
  r.admittance_offset = admittance_.x_f.translation.norm();
  r.phase = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == window.label) r.phase = static_cast<int>(i);
  }

  ++tick_;
  return r;
}

nlohmann::json trace_sidecar(const Simulation& sim) {
  const ScenarioConfig& c = sim.config();
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = c.name;
  j["source"] = c.source.string();
  j["seed"] = c.seed;
  j["dt"] = c.dt;
  j["duration"] = c.duration;
  j["ticks"] = c.total_ticks();
  j["phase_labels"] = sim.phase_labels();
  j["codes"] = {{"m_mode", {"position", "velocity"}},
                {"ma_status", {"optimal", "clamped_feasible", "infeasible"}}};
  j["config"] = nlohmann::json::parse(c.echo_json.empty() ? "{}" : c.echo_json);
  return j;
}

RunResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  Simulation sim(cfg);
  std::filesystem::create_directories(out_dir);
  RunResult res;
  res.trace = out_dir / (cfg.name + ".csv");
  TraceWriter writer(res.trace, sim.columns(), trace_sidecar(sim));
  std::vector<double> row;
  row.reserve(sim.columns().size());
  while (!sim.done()) {
    row.clear();
    flatten(sim.step(), row);
    writer.write(row);
  }
  writer.close();
  res.ticks = sim.tick();
  return res;
}

}  // namespace fic::sim
