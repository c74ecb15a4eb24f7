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

#include "fic/sim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fic::sim {

Percentiles percentiles(std::vector<double> v) {
  Percentiles p;
  if (v.empty()) return p;
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  p.p50 = at(0.5);
  p.p95 = at(0.95);
  p.max = v.back();
  return p;
}

MetricsSummary compute_metrics(const Trace& trace) {
  MetricsSummary m;
  m.scenario = trace.sidecar.value("scenario", "");
  m.rows = static_cast<long>(trace.rows.size());
  const double dt = trace.sidecar.value("dt", 0.0);
  m.duration = dt * static_cast<double>(m.rows);

  int arms = 0;
  while (trace.column("a" + std::to_string(arms) + "_he_fx") >= 0) ++arms;
  if (arms == 0) throw TraceError("trace has no arm columns");
  struct ArmCols {
    int fx, track, sat;
  };
  std::vector<ArmCols> cols;
  for (int a = 0; a < arms; ++a) {
    const std::string p = "a" + std::to_string(a) + "_";
    cols.push_back({trace.column(p + "he_fx"), trace.column(p + "track_err"),
                    trace.column(p + "sat")});
    if (cols.back().track < 0 || cols.back().sat < 0) throw TraceError("trace misses arm columns");
  }
  const int c_t = trace.column("t"), c_phase = trace.column("phase"),
            c_ke = trace.column("ke"), c_env = trace.column("env_energy"),
            c_work = trace.column("work_env"), c_res = trace.column("energy_residual"),
            c_scale = trace.column("work_scale");
  if (std::min({c_t, c_phase, c_ke, c_env, c_work, c_res, c_scale}) < 0) {
    throw TraceError("trace misses summary columns");
  }

  std::vector<std::string> labels;
  if (trace.sidecar.contains("phase_labels")) {
    labels = trace.sidecar["phase_labels"].get<std::vector<std::string>>();
  }
  std::vector<std::vector<double>> by_phase(labels.size());

  std::vector<double> force;
  force.reserve(trace.rows.size());
  long last_outside = -1;
  double worst_residual = 0.0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& r = trace.rows[i];
    double f = 0.0, err = 0.0;
    bool sat = false;
    for (const ArmCols& c : cols) {
      f = std::max(f, std::hypot(r[c.fx], r[c.fx + 1], r[c.fx + 2]));
      err = std::max(err, r[c.track]);
      sat = sat || r[c.sat] > 0.0;
    }
    force.push_back(f);
    m.max_tracking_error = std::max(m.max_tracking_error, err);
    if (err > kSettleBand) last_outside = static_cast<long>(i);
    if (sat) ++m.saturation_ticks;
    m.peak_energy = std::max(m.peak_energy, r[c_ke] + r[c_env]);
    worst_residual = std::max(worst_residual, std::abs(r[c_res]));
    const auto ph = static_cast<std::size_t>(r[c_phase]);
    if (ph < by_phase.size()) by_phase[ph].push_back(f);
  }
  m.force = percentiles(force);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m.phases.push_back({labels[i], static_cast<long>(by_phase[i].size()), percentiles(by_phase[i])});
  }
  // Settled from the first sample after the last one outside the band.
  if (last_outside >= 0) {
    const auto next = static_cast<std::size_t>(last_outside + 1);
    m.settling_time = next < trace.rows.size() ? trace.rows[next][c_t]
                                               : trace.rows.back()[c_t] + dt;
  }
  if (!trace.rows.empty()) {
    m.cycle_energy = trace.rows.back()[c_work];
    const double scale = trace.rows.back()[c_scale];
    m.energy_balance = scale > 0.0 ? worst_residual / scale : 0.0;
  }
  return m;
}

nlohmann::json to_json(const MetricsSummary& m) {
  auto pj = [](const Percentiles& p) {
    return nlohmann::json{{"p50", p.p50}, {"p95", p.p95}, {"max", p.max}};
  };
  nlohmann::json phases = nlohmann::json::array();
  for (const PhaseForces& p : m.phases) {
    phases.push_back({{"label", p.label}, {"ticks", p.ticks}, {"force_norm", pj(p.force)}});
  }
  return {{"scenario", m.scenario},
          {"rows", m.rows},
          {"duration", m.duration},
          {"force_norm", pj(m.force)},
          {"phases", phases},
          {"max_tracking_error", m.max_tracking_error},
          {"settling_time", m.settling_time},
          {"cycle_energy", m.cycle_energy},
          {"peak_energy", m.peak_energy},
          {"saturation_ticks", m.saturation_ticks},
          {"energy_balance", m.energy_balance}};
}

}  // namespace fic::sim
