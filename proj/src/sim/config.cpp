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

#include "fic/sim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "json.hpp"

namespace fic::sim {

namespace fs = std::filesystem;

namespace {

struct Ctx {
  std::string source;

  [[noreturn]] void fail(const YAML::Node& n, const std::string& what) const {
    std::ostringstream os;
    os << source;
    if (n.Mark().line >= 0) os << ":" << n.Mark().line + 1;
    os << ": " << what;
    throw ConfigError(os.str());
  }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source + ": " + what); }

  void keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) const {
    if (!n.IsMap()) fail(n, where + " must be a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
      const std::string k = kv.first.as<std::string>();
      if (!ok.count(k)) fail(kv.first, "unknown key '" + k + "' in " + where);
    }
  }

  double num(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(n, what + " must be finite");
      return v;
    } catch (const YAML::Exception&) {
      fail(n, what + " must be a number");
    }
  }
  double num(const YAML::Node& parent, const char* key, double fallback) const {
    const YAML::Node n = parent[key];
    return n ? num(n, key) : fallback;
  }
  bool flag(const YAML::Node& parent, const char* key, bool fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, std::string(key) + " must be true or false");
    }
  }
  std::string str(const YAML::Node& parent, const char* key, const std::string& fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(n, std::string(key) + " must be a string");
    return n.as<std::string>();
  }
  VecX vec(const YAML::Node& n, const std::string& what, int size = -1) const {
    if (!n.IsSequence()) fail(n, what + " must be a list");
    if (size >= 0 && static_cast<int>(n.size()) != size) {
      fail(n, what + " must have " + std::to_string(size) + " entries");
    }
    VecX v(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) v(i) = num(n[i], what);
    return v;
  }
  Vec3 vec3(const YAML::Node& parent, const char* key, const Vec3& fallback) const {
    const YAML::Node n = parent[key];
    return n ? Vec3(vec(n, key, 3)) : fallback;
  }

  Pose pose(const YAML::Node& n, const std::string& what) const {
    keys(n, what, {"translation", "rpy", "quaternion"});
    Pose p;
    p.translation = vec3(n, "translation", Vec3::Zero());
    if (n["rpy"] && n["quaternion"]) fail(n, what + ": give rpy or quaternion, not both");
    if (n["rpy"]) {
      const Vec3 r = vec(n["rpy"], "rpy", 3);
      p.rotation = Eigen::AngleAxisd(r.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(r.y(), Vec3::UnitY()) *
                   Eigen::AngleAxisd(r.x(), Vec3::UnitX());
    } else if (n["quaternion"]) {
      const VecX q = vec(n["quaternion"], "quaternion", 4);
      if (std::abs(q.norm() - 1.0) > 1e-6) fail(n["quaternion"], "quaternion must be unit");
      p.rotation = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized();
    }
    return p;
  }
};

nlohmann::json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json o = nlohmann::json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& e : n) a.push_back(to_json(e));
      return a;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (n.Tag() != "!") {
        double d;
        bool b;
        if (YAML::convert<bool>::decode(n, b) && (s == "true" || s == "false")) return b;
        if (YAML::convert<double>::decode(n, d)) return d;
      }
      return s;
    }
    default:
      return nullptr;
  }
}

YAML::Node parse_yaml(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_schema(const Ctx& c, const YAML::Node& root) {
  const YAML::Node v = root["schema_version"];
  if (!v) c.fail("schema_version is required");
  if (c.num(v, "schema_version") != kSchemaVersion) {
    c.fail(v, "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
}

Mat3 inertia_from(const Ctx& c, const YAML::Node& n) {
  const VecX v = c.vec(n, "inertia");
  Mat3 i = Mat3::Zero();
  if (v.size() == 3) {
    i.diagonal() = v;
  } else if (v.size() == 6) {  // ixx iyy izz ixy ixz iyz
    i << v(0), v(3), v(4), v(3), v(1), v(5), v(4), v(5), v(2);
  } else {
    c.fail(n, "inertia must have 3 or 6 entries");
  }
  return i;
}

PdParams pd_block(const Ctx& c, const YAML::Node& g, const std::string& suffix, PdParams def,
                  bool angular) {
  const double scale = angular ? std::numbers::pi / 180.0 : 1.0;
  PdParams p;
  p.f = c.num(g, ("f_" + suffix).c_str(), def.f);
  p.d = c.num(g, ("d_" + suffix).c_str(), def.d / scale) * scale;
  p.zeta = c.num(g, ("zeta_" + suffix).c_str(), def.zeta);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    c.fail(g, "gains " + suffix + ": " + e.what());
  }
  return p;
}

}  // namespace

ArmDescription parse_arm(const std::string& text, const std::string& source_name) {
  const Ctx c{source_name};
  const YAML::Node root = parse_yaml(text, source_name);
  if (!root.IsMap()) c.fail("arm file must be a mapping");
  c.keys(root, "arm", {"schema_version", "name", "gravity", "home", "tool", "joints"});
  check_schema(c, root);
  ArmDescription out;
  ArmModel& m = out.model;
  m.name = c.str(root, "name", "arm");
  m.gravity = c.vec3(root, "gravity", Vec3(0, 0, -9.81));
  if (root["tool"]) m.tool_offset = c.pose(root["tool"], "tool");
  const YAML::Node joints = root["joints"];
  if (!joints || !joints.IsSequence()) c.fail(root, "joints list is required");
  for (const YAML::Node& jn : joints) {
    c.keys(jn, "joint", {"axis", "offset", "mass", "com", "inertia", "armature", "q_min", "q_max",
                         "dq_max", "tau_max"});
    Joint j;
    j.axis = c.vec3(jn, "axis", Vec3::UnitZ());
    if (jn["offset"]) j.parent_offset = c.pose(jn["offset"], "offset");
    j.mass = c.num(jn, "mass", 0.0);
    j.com = c.vec3(jn, "com", Vec3::Zero());
    if (jn["inertia"]) j.inertia = inertia_from(c, jn["inertia"]);
    j.armature = c.num(jn, "armature", 0.0);
    j.q_min = c.num(jn, "q_min", j.q_min);
    j.q_max = c.num(jn, "q_max", j.q_max);
    j.dq_max = c.num(jn, "dq_max", j.dq_max);
    j.tau_max = c.num(jn, "tau_max", j.tau_max);
    m.joints.push_back(j);
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    c.fail(std::string("invalid arm: ") + e.what());
  }
  out.home = root["home"] ? c.vec(root["home"], "home", m.dof()) : VecX::Zero(m.dof());
  return out;
}

ArmDescription load_arm(const fs::path& path) {
  return parse_arm(read_file(path), path.string());
}

long ScenarioConfig::total_ticks() const { return std::lround(duration / dt); }

std::string ScenarioConfig::environment_type() const {
  switch (environment.index()) {
    case 1: return "soft_surface";
    case 2: return "human_partner";
    case 3: return "brittle_object";
    default: return "none";
  }
}

const ScheduleEntry& ScenarioConfig::window_at(double t) const {
  const ScheduleEntry* cur = &schedule.front();
  for (const ScheduleEntry& e : schedule) {
    if (e.t <= t + 1e-12) cur = &e;
  }
  return *cur;
}

std::vector<std::string> ScenarioConfig::window_labels() const {
  std::vector<std::string> out;
  for (const ScheduleEntry& e : schedule) {
    if (std::find(out.begin(), out.end(), e.label) == out.end()) out.push_back(e.label);
  }
  return out;
}

ScenarioConfig parse_config(const std::string& text, const fs::path& base_dir,
                            const std::string& source_name) {
  const Ctx c{source_name};
  const YAML::Node root = parse_yaml(text, source_name);
  if (!root.IsMap()) c.fail("scenario must be a mapping");
  c.keys(root, "scenario",
         {"schema_version", "name", "description", "duration", "dt", "substeps", "seed", "arms",
          "gains", "master", "admittance", "schedule", "torque", "adaptation", "environment",
          "channel", "bimanual"});
  check_schema(c, root);

  ScenarioConfig cfg;
  cfg.name = c.str(root, "name", fs::path(source_name).stem().string());
  cfg.description = c.str(root, "description", "");
  cfg.duration = c.num(root, "duration", cfg.duration);
  cfg.dt = c.num(root, "dt", cfg.dt);
  cfg.substeps = static_cast<int>(c.num(root, "substeps", cfg.substeps));
  if (root["seed"]) {
    const double s = c.num(root["seed"], "seed");
    if (s < 0 || s != std::floor(s)) c.fail(root["seed"], "seed must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (!(cfg.dt > 0.0 && cfg.dt <= 5e-3)) c.fail(root["dt"], "dt must lie in (0, 0.005]");
  if (!(cfg.duration > 0.0)) c.fail(root["duration"], "duration must be > 0");
  if (cfg.substeps < 1 || cfg.substeps > 100) c.fail(root["substeps"], "substeps must be 1..100");
  if (std::abs(cfg.duration / cfg.dt - std::round(cfg.duration / cfg.dt)) > 1e-6) {
    c.fail(root["duration"], "duration must be a whole number of ticks");
  }

  const YAML::Node arms = root["arms"];
  if (!arms || !arms.IsSequence() || arms.size() < 1 || arms.size() > 2) {
    c.fail(root, "arms must list one or two arms");
  }
  for (const YAML::Node& an : arms) {
    c.keys(an, "arms entry", {"model", "base", "q0"});
    const std::string file = c.str(an, "model", "");
    if (file.empty()) c.fail(an, "arms entry needs a model file");
    const fs::path path = base_dir / file;
    if (!fs::exists(path)) c.fail(an["model"], "arm model file not found: " + path.string());
    ArmDescription d = load_arm(path);
    if (an["base"]) {
      const Pose base = c.pose(an["base"], "base");
      d.model.joints.front().parent_offset = compose(base, d.model.joints.front().parent_offset);
    }
    ArmEntry e{d.model, an["q0"] ? c.vec(an["q0"], "q0", d.model.dof()) : d.home, file};
    for (int j = 0; j < e.model.dof(); ++j) {
      if (e.q0(j) < e.model.joints[j].q_min || e.q0(j) > e.model.joints[j].q_max) {
        c.fail(an, "q0 outside the joint range on joint " + std::to_string(j));
      }
    }
    cfg.arms.push_back(std::move(e));
  }

  if (const YAML::Node g = root["gains"]) {
    c.keys(g, "gains",
           {"f_lin", "d_lin", "zeta_lin", "f_ang", "d_ang", "zeta_ang", "f_rel_lin", "d_rel_lin",
            "zeta_rel_lin", "f_rel_ang", "d_rel_ang", "zeta_rel_ang", "f_joint", "d_joint",
            "zeta_joint", "xi"});
    const DefaultGains def;
    cfg.gains.lin = pd_block(c, g, "lin", def.lin, false);
    cfg.gains.ang = pd_block(c, g, "ang", def.ang, true);
    cfg.gains.rel_lin = pd_block(c, g, "rel_lin", def.rel_lin, false);
    cfg.gains.rel_ang = pd_block(c, g, "rel_ang", def.rel_ang, true);
    cfg.gains.joint = pd_block(c, g, "joint", def.joint, true);
    cfg.gains.xi = c.num(g, "xi", def.xi);
    if (!(cfg.gains.xi > 0.0 && cfg.gains.xi < 1.0)) c.fail(g, "xi must lie in (0, 1)");
  }

  if (const YAML::Node m = root["master"]) {
    c.keys(m, "master", {"script", "k_h", "workspace_radius", "workspace_radius_ang"});
    const std::string script = c.str(m, "script", "");
    if (!script.empty()) {
      cfg.master.script = base_dir / script;
      if (!fs::exists(cfg.master.script)) {
        c.fail(m["script"], "master script not found: " + cfg.master.script.string());
      }
    }
    cfg.master.k_h = std::clamp(c.num(m, "k_h", 0.0), 0.0, 1.0);
    cfg.master.limits.radius_lin = c.num(m, "workspace_radius", cfg.master.limits.radius_lin);
    cfg.master.limits.radius_ang = c.num(m, "workspace_radius_ang", cfg.master.limits.radius_ang);
    if (cfg.master.limits.radius_lin < 0 || cfg.master.limits.radius_ang < 0) {
      c.fail(m, "workspace radii must be >= 0");
    }
  }

  if (const YAML::Node a = root["admittance"]) {
    c.keys(a, "admittance", {"enabled", "mass", "inertia", "dv_max_lin", "dv_max_ang"});
    cfg.admittance.enabled = c.flag(a, "enabled", false);
    const Vec3 mass = c.vec3(a, "mass", Vec3::Constant(10.0));
    const Vec3 inertia = c.vec3(a, "inertia", Vec3::Constant(0.5));
    if ((mass.array() <= 0).any() || (inertia.array() <= 0).any()) {
      c.fail(a, "admittance mass and inertia must be > 0");
    }
    cfg.admittance.m_inv << inertia.cwiseInverse(), mass.cwiseInverse();
    const double lin = c.num(a, "dv_max_lin", 0.002);
    const double ang = c.num(a, "dv_max_ang", 0.01);
    if (lin <= 0 || ang <= 0) c.fail(a, "dv_max must be > 0");
    cfg.admittance.dv_max << Vec3::Constant(ang), Vec3::Constant(lin);
  }

  if (const YAML::Node s = root["schedule"]) {
    if (!s.IsSequence() || s.size() == 0) c.fail(s, "schedule must be a non-empty list");
    double last = -1.0;
    for (const YAML::Node& e : s) {
      c.keys(e, "schedule entry", {"t", "label", "admittance"});
      ScheduleEntry se;
      se.t = c.num(e, "t", 0.0);
      se.label = c.str(e, "label", "run");
      se.admittance = c.flag(e, "admittance", cfg.admittance.enabled);
      if (se.t <= last) c.fail(e, "schedule times must increase");
      last = se.t;
      cfg.schedule.push_back(se);
    }
  } else {
    cfg.schedule.push_back({0.0, "run", cfg.admittance.enabled});
  }

  if (const YAML::Node t = root["torque"]) {
    c.keys(t, "torque", {"joint_pd", "interaction", "relative", "interaction_point"});
    cfg.torque.switches.joint_pd = c.flag(t, "joint_pd", true);
    cfg.torque.switches.interaction = c.flag(t, "interaction", true);
    cfg.torque.switches.relative = c.flag(t, "relative", true);
    cfg.torque.interaction_point = c.vec3(t, "interaction_point", Vec3::Zero());
  }

  if (const YAML::Node a = root["adaptation"]) {
    c.keys(a, "adaptation", {"weights", "margins"});
    if (const YAML::Node w = a["weights"]) {
      c.keys(w, "weights", {"task_lin", "task_ang", "dq_reg", "wrench_reg", "relative_lin",
                            "relative_ang"});
      CostWeights& cw = cfg.weights;
      cw.task_lin = c.num(w, "task_lin", cw.task_lin);
      cw.task_ang = c.num(w, "task_ang", cw.task_ang);
      cw.dq_reg = c.num(w, "dq_reg", cw.dq_reg);
      cw.wrench_reg = c.num(w, "wrench_reg", cw.wrench_reg);
      cw.relative_lin = c.num(w, "relative_lin", cw.relative_lin);
      cw.relative_ang = c.num(w, "relative_ang", cw.relative_ang);
      for (double v : {cw.task_lin, cw.task_ang, cw.dq_reg, cw.wrench_reg, cw.relative_lin,
                       cw.relative_ang}) {
        if (!(v > 0)) c.fail(w, "weights must be > 0");
      }
    }
    if (const YAML::Node m = a["margins"]) {
      c.keys(m, "margins", {"q", "dq_fraction", "tau_fraction", "manipulability_floor"});
      LimitMargins& lm = cfg.margins;
      lm.q = c.num(m, "q", lm.q);
      lm.dq_fraction = c.num(m, "dq_fraction", lm.dq_fraction);
      lm.tau_fraction = c.num(m, "tau_fraction", lm.tau_fraction);
      lm.manipulability_floor = c.num(m, "manipulability_floor", lm.manipulability_floor);
      if (!(lm.manipulability_floor > 0)) c.fail(m, "manipulability_floor must be > 0");
      if (!(lm.dq_fraction > 0) || !(lm.tau_fraction > 0) || lm.q < 0) {
        c.fail(m, "margins must be positive");
      }
    }
  }

  if (const YAML::Node e = root["environment"]) {
    const std::string type = c.str(e, "type", "none");
    if (type == "soft_phantom" || type == "probe") {
      c.keys(e, "environment", {"type", "stiffness", "exponent", "damping", "tangential_damping",
                                "point", "normal", "bumps"});
      SoftSurfaceConfig s;
      s.stiffness = c.num(e, "stiffness", s.stiffness);
      s.exponent = c.num(e, "exponent", s.exponent);
      s.damping = c.num(e, "damping", s.damping);
      s.tangential_damping = c.num(e, "tangential_damping", s.tangential_damping);
      s.point = c.vec3(e, "point", s.point);
      s.normal = c.vec3(e, "normal", s.normal);
      if (s.normal.norm() < 1e-9) c.fail(e, "surface normal must be non-zero");
      s.normal.normalize();
      if (!(s.stiffness > 0) || !(s.exponent >= 1.0) || s.damping < 0 ||
          s.tangential_damping < 0) {
        c.fail(e, "surface needs stiffness > 0, exponent >= 1 and non-negative damping");
      }
      if (const YAML::Node b = e["bumps"]) {
        if (!b.IsSequence()) c.fail(b, "bumps must be a list");
        for (const YAML::Node& bn : b) {
          c.keys(bn, "bump", {"x", "y", "height", "sigma"});
          Bump bump{c.num(bn, "x", 0.0), c.num(bn, "y", 0.0), c.num(bn, "height", 0.0),
                    c.num(bn, "sigma", 0.05)};
          if (!(bump.sigma > 0)) c.fail(bn, "bump sigma must be > 0");
          s.bumps.push_back(bump);
        }
      }
      cfg.environment = s;
    } else if (type == "human_partner") {
      c.keys(e, "environment", {"type", "profile", "k_hand", "b_hand"});
      HumanPartnerConfig h;
      h.k_hand = c.num(e, "k_hand", h.k_hand);
      h.b_hand = c.num(e, "b_hand", h.b_hand);
      if (h.k_hand < 0 || h.b_hand < 0) c.fail(e, "hand stiffness and damping must be >= 0");
      const YAML::Node p = e["profile"];
      if (!p || !p.IsSequence() || p.size() == 0) c.fail(e, "human_partner needs a profile list");
      double last = -1.0;
      for (const YAML::Node& k : p) {
        const VecX v = c.vec(k, "profile entry", 4);  // t fx fy fz
        if (v(0) <= last) c.fail(k, "profile times must increase");
        last = v(0);
        h.profile.push_back({v(0), v.tail<3>()});
      }
      cfg.environment = h;
    } else if (type == "brittle_object") {
      c.keys(e, "environment", {"type", "mass", "break_force", "stiffness", "length"});
      BrittleConfig b;
      b.mass = c.num(e, "mass", b.mass);
      b.break_force = c.num(e, "break_force", b.break_force);
      b.stiffness = c.num(e, "stiffness", b.stiffness);
      if (e["length"]) b.length = c.num(e["length"], "length");
      if (b.mass < 0 || !(b.break_force > 0) || !(b.stiffness > 0)) {
        c.fail(e, "brittle_object needs mass >= 0, break_force > 0, stiffness > 0");
      }
      cfg.environment = b;
    } else if (type != "none") {
      c.fail(e["type"], "unknown environment type '" + type + "'");
    }
  }

  if (const YAML::Node ch = root["channel"]) {
    c.keys(ch, "channel", {"delay_ms", "jitter_ms", "drop_rate"});
    cfg.channel.delay_ms = c.num(ch, "delay_ms", 0.0);
    cfg.channel.jitter_ms = c.num(ch, "jitter_ms", 0.0);
    cfg.channel.drop_rate = c.num(ch, "drop_rate", 0.0);
    if (cfg.channel.delay_ms < 0 || cfg.channel.jitter_ms < 0) {
      c.fail(ch, "delay and jitter must be >= 0");
    }
    if (!(cfg.channel.drop_rate >= 0.0 && cfg.channel.drop_rate < 1.0)) {
      c.fail(ch, "drop_rate must lie in [0, 1)");
    }
  }

  if (const YAML::Node b = root["bimanual"]) {
    c.keys(b, "bimanual", {"squeeze", "separation_offset"});
    BimanualConfig bc;
    bc.squeeze = c.num(b, "squeeze", bc.squeeze);
    bc.separation_offset = c.vec3(b, "separation_offset", Vec3::Zero());
    cfg.bimanual = bc;
    if (cfg.arms.size() != 2) c.fail(b, "bimanual mode needs exactly two arms");
  }
  if (std::holds_alternative<BrittleConfig>(cfg.environment) && !cfg.bimanual) {
    c.fail("brittle_object needs a bimanual block");
  }

  cfg.echo_json = to_json(root).dump();
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  ScenarioConfig cfg = parse_config(read_file(path), path.parent_path(), path.string());
  cfg.source = path;
  return cfg;
}

}  // namespace fic::sim
