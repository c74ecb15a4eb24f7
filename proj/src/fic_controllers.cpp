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

#include "fic/fic_controllers.hpp"

#include <algorithm>
#include <stdexcept>

namespace fic {

namespace {
double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace

void PdParams::validate() const {
  if (!(f > 0.0)) throw std::invalid_argument("PD saturation force f must be > 0");
  if (!(d > 0.0)) throw std::invalid_argument("PD saturation distance d must be > 0");
  if (!(zeta >= 0.0)) throw std::invalid_argument("PD damping ratio must be >= 0");
}

void NlpdParams::validate() const {
  pd.validate();
  if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("NLPD xi must lie in (0, 1)");
}

double pd_force(const PdParams& p, double x_d, double x, double dx) {
  const double e = x_d - x;
  const double fk = std::abs(e) < p.d ? p.kp() * e : sign(e) * p.f;
  return fk - p.kd() * dx;
}

double nlpd_profile(const NlpdParams& p, double x_tilde) {
  const double a = std::abs(x_tilde);
  if (a <= p.x_b()) return p.kp() * x_tilde;
  const double arg = (a - p.x_b()) / p.s() - std::numbers::pi;
  return sign(x_tilde) * (0.5 * p.lambda() * (std::tanh(arg) + 1.0) + p.e0());
}

double nlpd_profile_slope(const NlpdParams& p, double x_tilde) {
  const double a = std::abs(x_tilde);
  if (a <= p.x_b()) return p.kp();
  const double arg = (a - p.x_b()) / p.s() - std::numbers::pi;
  const double c = std::cosh(arg);
  return 0.5 * p.lambda() / (p.s() * c * c);
}

NlpdAxisState nlpd_update_phase(const NlpdAxisState& state, double x_tilde) {
  NlpdAxisState next = state;
  const double a = std::abs(x_tilde);
  const bool crossed =
      x_tilde * state.x_tilde_prev < 0.0 || (x_tilde == 0.0 && state.x_tilde_prev != 0.0);

  if (crossed) {
    next.phase = NlpdPhase::Divergence;
    next.x_max = a;
    next.trough = a;
  } else if (state.phase == NlpdPhase::Divergence) {
    if (a >= state.x_max) {
      next.x_max = a;
    } else if (a < state.x_max - kNlpdDeadband) {
      next.phase = NlpdPhase::Convergence;
      next.trough = a;
    }
  } else {
    if (a > state.trough + kNlpdDeadband) {
      // Renewed growth opens a new cycle from here.
      next.phase = NlpdPhase::Divergence;
      next.x_max = a;
      next.trough = a;
    } else {
      next.trough = std::min(state.trough, a);
    }
  }
  next.x_tilde_prev = x_tilde;
  return next;
}

double nlpd_spring(const NlpdParams& p, const NlpdAxisState& state, double x_tilde) {
  double fk;
  if (state.phase == NlpdPhase::Divergence) {
    fk = nlpd_profile(p, x_tilde);
  } else {
    if (state.x_max <= 0.0) return 0.0;
    const double slope = 2.0 * nlpd_profile(p, state.x_max) / state.x_max;
    fk = slope * (x_tilde - sign(x_tilde) * 0.5 * state.x_max);
  }
  return std::clamp(fk, -p.e_max(), p.e_max());
}

double nlpd_force(const NlpdParams& p, const NlpdAxisState& state, double x_d, double x,
                  double dx) {
  return nlpd_spring(p, state, x_d - x) - p.kd() * dx;
}

double effective_stiffness(const NlpdParams& p, const NlpdAxisState& state, double x_tilde) {
  if (state.phase == NlpdPhase::Convergence) {
    if (state.x_max <= 0.0) return p.kp();
    return 2.0 * nlpd_profile(p, state.x_max) / state.x_max;
  }
  return nlpd_profile_slope(p, x_tilde);
}

NlpdParams6 make_nlpd6(const PdParams& angular, const PdParams& linear, double xi) {
  NlpdParams6 out;
  for (int i = 0; i < 3; ++i) out[i] = NlpdParams{angular, xi};
  for (int i = 3; i < 6; ++i) out[i] = NlpdParams{linear, xi};
  return out;
}

PdParams6 make_pd6(const PdParams& angular, const PdParams& linear) {
  PdParams6 out;
  for (int i = 0; i < 3; ++i) out[i] = angular;
  for (int i = 3; i < 6; ++i) out[i] = linear;
  return out;
}

Vec6 nlpd_wrench_from_error(const NlpdParams6& params, NlpdStates6& states,
                            const Vec6& error, const Vec6& velocity) {
  Vec6 w;
  for (int i = 0; i < 6; ++i) {
    states[i] = nlpd_update_phase(states[i], error(i));
    w(i) = nlpd_spring(params[i], states[i], error(i)) - params[i].kd() * velocity(i);
  }
  return w;
}

Wrench nlpd_wrench(const NlpdParams6& params, NlpdStates6& states, const Pose& x_d,
                   const Pose& x, const Twist& v) {
  return Wrench::from_vector(nlpd_wrench_from_error(params, states, pose_error(x_d, x),
                                                    v.vector()));
}

Vec6 effective_stiffness6(const NlpdParams6& params, const NlpdStates6& states,
                          const Vec6& error) {
  Vec6 k;
  for (int i = 0; i < 6; ++i) k(i) = effective_stiffness(params[i], states[i], error(i));
  return k;
}

Vec6 pd_wrench_from_error(const PdParams6& params, const Vec6& error, const Vec6& velocity) {
  Vec6 w;
  for (int i = 0; i < 6; ++i) w(i) = pd_force(params[i], error(i), 0.0, velocity(i));
  return w;
}

VecX pd_joint_torque(const PdParams& params, const VecX& q_d, const VecX& q, const VecX& dq) {
  if (q_d.size() != q.size() || dq.size() != q.size()) {
    throw std::invalid_argument("joint PD dimension mismatch");
  }
  VecX tau(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) tau(i) = pd_force(params, q_d(i), q(i), dq(i));
  return tau;
}

}  // namespace fic
