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

#include <string>
#include <vector>

#include "fic/sim/trace.hpp"
#include "json.hpp"

namespace fic::sim {

struct Percentiles {
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

/// Linear-interpolated percentiles; all zero for an empty sample.
Percentiles percentiles(std::vector<double> v);

struct PhaseForces {
  std::string label;
  long ticks = 0;
  Percentiles force;
};

struct MetricsSummary {
  std::string scenario;
  long rows = 0;
  double duration = 0.0;
  Percentiles force;  // per tick, the largest tool contact force over arms (N)
  std::vector<PhaseForces> phases;
  double max_tracking_error = 0.0;  // m
  double settling_time = 0.0;       // s, see kSettleBand
  double cycle_energy = 0.0;        // J, net work of the environment on the arms
  double peak_energy = 0.0;         // J, kinetic plus contact-stored
  long saturation_ticks = 0;
  double energy_balance = 0.0;      // worst |residual| over the total work moved
};

/// Tracking error band that counts as settled.
inline constexpr double kSettleBand = 1e-3;

MetricsSummary compute_metrics(const Trace& trace);
nlohmann::json to_json(const MetricsSummary& m);

}  // namespace fic::sim
