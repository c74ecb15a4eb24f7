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

#include "fic/sim/master_input.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fic/sim/config.hpp"
#include "fic/sim/numfmt.hpp"

namespace fic::sim {

std::string mode_name(MasterModeKind m) {
  return m == MasterModeKind::Position ? "position" : "velocity";
}

MasterModeKind parse_mode(const std::string& s) {
  if (s == "position" || s == "P") return MasterModeKind::Position;
  if (s == "velocity" || s == "V") return MasterModeKind::Velocity;
  throw std::invalid_argument("unknown master mode '" + s + "'");
}

long sample_start_tick(double t, double dt) {
  return std::max(0L, static_cast<long>(std::ceil(t / dt - 1e-6)));
}

std::vector<MasterSample> read_master_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open master script " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,mode,", 0) != 0) {
    throw ConfigError(path.string() + ":1: expected header starting with t,mode,");
  }
  std::vector<MasterSample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 16) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 16 columns");
    }
    try {
      MasterSample s;
      s.t = parse_double(cells[0]);
      s.mode = parse_mode(cells[1]);
      double v[14];
      for (int i = 0; i < 14; ++i) v[i] = parse_double(cells[2 + i]);
      s.x_m = Pose::from_array(std::span<const double>(v, 7));
      s.v_m = Twist{Vec3(v[7], v[8], v[9]), Vec3(v[10], v[11], v[12])};
      s.k_h = v[13];
      out.push_back(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError(path.string() + ": master script has no samples");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i].t > out[i - 1].t)) throw ConfigError(path.string() + ": times must increase");
  }
  return out;
}

void write_master_csv(const std::filesystem::path& path, const std::vector<MasterSample>& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t,mode,qw,qx,qy,qz,x,y,z,wx,wy,wz,vx,vy,vz,k_h\n";
  for (const MasterSample& m : s) {
    const auto p = m.x_m.to_array();
    out << format_double(m.t) << ',' << mode_name(m.mode);
    for (double v : p) out << ',' << format_double(v);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(m.v_m.angular(i));
    for (int i = 0; i < 3; ++i) out << ',' << format_double(m.v_m.linear(i));
    out << ',' << format_double(m.k_h) << '\n';
  }
}

}  // namespace fic::sim
