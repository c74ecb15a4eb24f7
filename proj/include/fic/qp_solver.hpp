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

#include <vector>

#include "fic/geom.hpp"

namespace fic {

/// min 0.5 x'Hx + g'x  s.t.  A_eq x + b_eq = 0,  A_in x + b_in >= 0.
/// H must be symmetric positive definite. Constraints are stored row-wise.
struct QpProblem {
  MatX hessian;
  VecX gradient;
  MatX a_eq;
  VecX b_eq;
  MatX a_in;
  VecX b_in;

  int num_vars() const { return static_cast<int>(gradient.size()); }
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  VecX x;
  VecX multipliers_eq;
  VecX multipliers_in;         // >= 0, zero for inactive rows
  std::vector<int> active_in;  // indices of active inequality rows
  int iterations = 0;
  double kkt_residual = 0.0;   // stationarity + primal violation, inf-norm
};

/// Dual active-set method of Goldfarb and Idnani. Starts from the
/// unconstrained minimizer and adds the most violated constraint each step,
/// so an interior optimum is returned without touching any constraint.
QpResult solve_qp(const QpProblem& problem);

/// Stationarity and feasibility residual of a candidate primal/dual pair.
double kkt_residual(const QpProblem& problem, const VecX& x, const VecX& mult_eq,
                    const VecX& mult_in);

}  // namespace fic
