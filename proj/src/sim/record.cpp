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

#include "fic/sim/record.hpp"

namespace fic::sim {

namespace {

const char* const kPose[] = {"qw", "qx", "qy", "qz", "x", "y", "z"};
const char* const kSix[] = {"rx", "ry", "rz", "x", "y", "z"};
const char* const kWrench[] = {"tx", "ty", "tz", "fx", "fy", "fz"};

void add_group(std::vector<std::string>& c, const std::string& prefix, const char* const* names,
               int n) {
  for (int i = 0; i < n; ++i) c.push_back(prefix + names[i]);
}

void put_pose(std::vector<double>& out, const Pose& p) {
  for (double v : p.to_array()) out.push_back(v);
}

void put6(std::vector<double>& out, const Vec6& v) {
  for (int i = 0; i < 6; ++i) out.push_back(v(i));
}

}  // namespace

double mode_code(MasterModeKind m) { return m == MasterModeKind::Position ? 0.0 : 1.0; }

double status_code(AdaptationStatus s) {
  switch (s) {
    case AdaptationStatus::Optimal: return 0.0;
    case AdaptationStatus::ClampedFeasible: return 1.0;
    case AdaptationStatus::Infeasible: return 2.0;
  }
  return 2.0;
}

std::vector<std::string> record_columns(const std::vector<int>& dofs) {
  std::vector<std::string> c{"tick", "t"};
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    const std::string p = "a" + std::to_string(a) + "_";
    for (const char* g : {"q", "dq", "tau"}) {
      for (int j = 0; j < dofs[a]; ++j) c.push_back(p + g + std::to_string(j));
    }
    add_group(c, p + "x_", kPose, 7);
    add_group(c, p + "he_", kWrench, 6);
    add_group(c, p + "xd_", kPose, 7);
    add_group(c, p + "k_", kSix, 6);
    add_group(c, p + "hd_", kWrench, 6);
    for (const char* g : {"manip", "sat", "track_err"}) c.push_back(p + g);
  }
  c.push_back("m_mode");
  add_group(c, "m_x_", kPose, 7);
  add_group(c, "m_xd_", kPose, 7);
  c.push_back("m_kh");
  add_group(c, "m_hh_", kWrench, 6);
  for (const char* g :
       {"ch_fwd_depth", "ch_back_depth", "ch_fwd_dropped", "ch_back_dropped", "ma_status",
        "ma_kkt", "ma_active", "adm_on", "adm_offset", "ke", "pe", "env_energy", "env_load",
        "env_broken", "work_act", "work_env", "energy_residual", "work_scale", "grasp_residual", "rel_err_lin",
        "rel_err_ang", "phase"}) {
    c.push_back(g);
  }
  return c;
}

void flatten(const StepRecord& r, std::vector<double>& out) {
  out.push_back(static_cast<double>(r.tick));
  out.push_back(r.t);
  for (const ArmRecord& a : r.arms) {
    for (const VecX* v : {&a.q, &a.dq, &a.tau}) {
      for (Eigen::Index j = 0; j < v->size(); ++j) out.push_back((*v)(j));
    }
    put_pose(out, a.x);
    put6(out, a.h_e.vector());
    put_pose(out, a.x_delta);
    put6(out, a.stiffness);
    put6(out, a.h_d);
    out.push_back(a.manipulability);
    out.push_back(a.saturated);
    out.push_back(a.track_error);
  }
  out.push_back(mode_code(r.mode));
  put_pose(out, r.x_m);
  put_pose(out, r.x_d);
  out.push_back(r.k_h);
  put6(out, r.h_h.vector());
  for (double v :
       {static_cast<double>(r.fwd_depth), static_cast<double>(r.back_depth),
        static_cast<double>(r.fwd_dropped), static_cast<double>(r.back_dropped),
        status_code(r.status), r.kkt_residual, static_cast<double>(r.active_set),
        r.admittance ? 1.0 : 0.0, r.admittance_offset, r.kinetic, r.potential, r.env_energy,
        r.env_load, r.env_broken ? 1.0 : 0.0, r.work_actuators, r.work_environment,
        r.energy_residual, r.work_scale, r.grasp_residual, r.rel_error_lin, r.rel_error_ang,
        static_cast<double>(r.phase)}) {
    out.push_back(v);
  }
}

}  // namespace fic::sim
