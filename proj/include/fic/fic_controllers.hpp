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

#include <array>
#include <cmath>
#include <numbers>

#include "fic/geom.hpp"

namespace fic {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Saturated passive PD tuned by its force bound f and saturation distance d.
struct PdParams {
  double f = 1.0;     // saturation force (N, N*m)
  double d = 1.0;     // saturation distance (m, rad)
  double zeta = 0.0;  // damping ratio

  double kp() const { return f / d; }
  double kd() const { return 2.0 * zeta * std::sqrt(kp()); }
  /// Throws std::invalid_argument unless f > 0, d > 0 and zeta >= 0.
  void validate() const;
};

/// Fractal impedance (NLPD) parameters. Everything beyond the PD triple and
/// xi is derived: E_max = f, E_0 = xi*kp*d, Lambda = E_max - E_0,
/// S = (1 - xi) d / (2 pi), and the saturation branch starts at x_b = xi*d.
struct NlpdParams {
  PdParams pd;
  double xi = 0.9;

  double kp() const { return pd.kp(); }
  double kd() const { return pd.kd(); }
  double e_max() const { return pd.f; }
  double e0() const { return xi * kp() * pd.d; }
  double lambda() const { return e_max() - e0(); }
  double s() const { return (1.0 - xi) * pd.d / (2.0 * std::numbers::pi); }
  double x_b() const { return xi * pd.d; }
  void validate() const;
};

enum class NlpdPhase { Divergence, Convergence };

/// Per-axis cycle memory of the NLPD.
struct NlpdAxisState {
  NlpdPhase phase = NlpdPhase::Divergence;
  double x_tilde_prev = 0.0;
  double x_max = 0.0;   // peak |error| of the current cycle
  double trough = 0.0;  // smallest |error| since entering Convergence
};

/// |error| changes smaller than this do not switch phase.
inline constexpr double kNlpdDeadband = 1e-6;

double pd_force(const PdParams& p, double x_d, double x, double dx);

/// Force profile E of the divergence branch, odd in the error.
double nlpd_profile(const NlpdParams& p, double x_tilde);
/// dE/dx_tilde.
double nlpd_profile_slope(const NlpdParams& p, double x_tilde);

NlpdAxisState nlpd_update_phase(const NlpdAxisState& state, double x_tilde);

/// Stiffness term F_k alone (no damping) for an already updated state.
double nlpd_spring(const NlpdParams& p, const NlpdAxisState& state, double x_tilde);

/// F_k - kd*dx. `state` must already be updated for x_d - x.
double nlpd_force(const NlpdParams& p, const NlpdAxisState& state, double x_d, double x,
                  double dx);

/// dF_k/dx_tilde of the active branch.
double effective_stiffness(const NlpdParams& p, const NlpdAxisState& state, double x_tilde);

/// Axis order everywhere: rx, ry, rz, x, y, z.
using NlpdParams6 = std::array<NlpdParams, 6>;
using NlpdStates6 = std::array<NlpdAxisState, 6>;
using PdParams6 = std::array<PdParams, 6>;

NlpdParams6 make_nlpd6(const PdParams& angular, const PdParams& linear, double xi = 0.9);
PdParams6 make_pd6(const PdParams& angular, const PdParams& linear);

/// Decoupled NLPD on the six pose-error axes. Updates the phases in place and
/// returns the commanded wrench in the base frame.
Wrench nlpd_wrench(const NlpdParams6& params, NlpdStates6& states, const Pose& x_d,
                   const Pose& x, const Twist& v);

/// Same as nlpd_wrench on a precomputed error vector and velocity.
Vec6 nlpd_wrench_from_error(const NlpdParams6& params, NlpdStates6& states,
                            const Vec6& error, const Vec6& velocity);

Vec6 effective_stiffness6(const NlpdParams6& params, const NlpdStates6& states,
                          const Vec6& error);

Vec6 pd_wrench_from_error(const PdParams6& params, const Vec6& error, const Vec6& velocity);

/// Joint-space PD with the same parameters on every joint.
VecX pd_joint_torque(const PdParams& params, const VecX& q_d, const VecX& q, const VecX& dq);

/// Default gains for the teleoperation loops.
struct DefaultGains {
  PdParams lin{40.0, 0.08, 0.8};
  PdParams ang{2.0, deg2rad(8.0), 0.2};
  PdParams rel_lin{50.0, 0.05, 0.4};
  PdParams rel_ang{5.0, deg2rad(5.0), 0.1};
  PdParams joint{0.3, deg2rad(10.0), 0.0};
  double xi = 0.9;
};

/// Stateful six-axis NLPD, the unit a control loop owns.
class NlpdController {
 public:
  NlpdController() = default;
  explicit NlpdController(const NlpdParams6& params) : params_(params) {}

  Wrench wrench(const Pose& x_d, const Pose& x, const Twist& v) {
    return nlpd_wrench(params_, states_, x_d, x, v);
  }
  Vec6 stiffness(const Pose& x_d, const Pose& x) const {
    return effective_stiffness6(params_, states_, pose_error(x_d, x));
  }
  void reset() { states_ = {}; }

  const NlpdParams6& params() const { return params_; }
  const NlpdStates6& states() const { return states_; }

 private:
  NlpdParams6 params_{};
  NlpdStates6 states_{};
};

}  // namespace fic
