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

#include "fic/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace fic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ActiveConstraint {
  bool equality;
  int row;
  double multiplier;
};

class ActiveSetSolver {
 public:
  explicit ActiveSetSolver(const QpProblem& p) : p_(p), n_(p.num_vars()) {
    llt_.compute(p.hessian);
    if (llt_.info() != Eigen::Success) {
      throw std::invalid_argument("QP hessian is not positive definite");
    }
    l_inv_ = llt_.matrixL().solve(MatX::Identity(n_, n_));
  }

  QpResult run() {
    QpResult out;
    x_ = -llt_.solve(p_.gradient);

    for (int i = 0; i < p_.a_eq.rows(); ++i) {
      if (!add_equality(i)) return finish(QpStatus::Infeasible);
    }

    const int max_iter = 20 * (n_ + static_cast<int>(p_.a_in.rows())) + 100;
    int iter = 0;
    std::vector<bool> in_set(p_.a_in.rows(), false);
    for (const auto& a : active_) {
      if (!a.equality) in_set[a.row] = true;
    }

    while (true) {
      if (++iter > max_iter) return finish(QpStatus::IterationLimit, iter);
      // Most violated inactive inequality.
      int p = -1;
      double worst = -kFeasTol;
      for (int j = 0; j < p_.a_in.rows(); ++j) {
        if (in_set[j]) continue;
        const double s = value(false, j);
        if (s < worst) {
          worst = s;
          p = j;
        }
      }
      if (p < 0) return finish(QpStatus::Optimal, iter);

      const VecX np = p_.a_in.row(p).transpose();
      double u_plus = 0.0;
      while (true) {
        if (++iter > max_iter) return finish(QpStatus::IterationLimit, iter);
        VecX z, r;
        directions(np, z, r);

        // Partial step: largest dual step keeping inequality multipliers >= 0.
        double t1 = kInf;
        int drop = -1;
        for (std::size_t k = 0; k < active_.size(); ++k) {
          if (active_[k].equality || r(k) <= kDirTol) continue;
          const double ratio = active_[k].multiplier / r(k);
          if (ratio < t1) {
            t1 = ratio;
            drop = static_cast<int>(k);
          }
        }
        // Full step: makes constraint p active.
        double t2 = kInf;
        const double znp = z.dot(np);
        if (z.norm() > kDirTol * std::max(1.0, np.norm()) && znp > 0.0) {
          t2 = -value(false, p) / znp;
        }
        const double t = std::min(t1, t2);
        if (t == kInf) return finish(QpStatus::Infeasible, iter);

        if (t2 == kInf) {
          for (std::size_t k = 0; k < active_.size(); ++k) active_[k].multiplier -= t * r(k);
          u_plus += t;
          in_set[active_[drop].row] = false;
          active_.erase(active_.begin() + drop);
          continue;
        }

        x_ += t * z;
        for (std::size_t k = 0; k < active_.size(); ++k) active_[k].multiplier -= t * r(k);
        u_plus += t;

        if (t2 <= t1) {
          active_.push_back({false, p, u_plus});
          in_set[p] = true;
          break;
        }
        in_set[active_[drop].row] = false;
        active_.erase(active_.begin() + drop);
      }
    }
  }

 private:
  static constexpr double kFeasTol = 1e-11;
  static constexpr double kDirTol = 1e-12;

  double value(bool eq, int row) const {
    return eq ? p_.a_eq.row(row).dot(x_) + p_.b_eq(row) : p_.a_in.row(row).dot(x_) + p_.b_in(row);
  }

  // z: primal step direction, r: change of active multipliers per unit step.
  void directions(const VecX& np, VecX& z, VecX& r) const {
    const int q = static_cast<int>(active_.size());
    if (q == 0) {
      z = llt_.solve(np);
      r.resize(0);
      return;
    }
    MatX normals(n_, q);
    for (int k = 0; k < q; ++k) {
      const auto& a = active_[k];
      normals.col(k) = a.equality ? p_.a_eq.row(a.row).transpose() : p_.a_in.row(a.row).transpose();
    }
    const MatX b = l_inv_ * normals;
    Eigen::HouseholderQR<MatX> qr(b);
    const MatX qmat = qr.householderQ();
    const MatX j = l_inv_.transpose() * qmat;
    const VecX d = j.transpose() * np;
    if (q < n_) {
      z = j.rightCols(n_ - q) * d.tail(n_ - q);
    } else {
      z = VecX::Zero(n_);
    }
    const MatX rmat = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
    r = rmat.triangularView<Eigen::Upper>().solve(d.head(q));
  }

  bool add_equality(int row) {
    const VecX np = p_.a_eq.row(row).transpose();
    VecX z, r;
    directions(np, z, r);
    const double znp = z.dot(np);
    if (z.norm() <= kDirTol * std::max(1.0, np.norm()) || std::abs(znp) <= 0.0) {
      // Dependent on constraints already active: consistent only if satisfied.
      return std::abs(value(true, row)) <= 1e-9;
    }
    const double t = -value(true, row) / znp;
    x_ += t * z;
    for (std::size_t k = 0; k < active_.size(); ++k) active_[k].multiplier -= t * r(k);
    active_.push_back({true, row, t});
    return true;
  }

  QpResult finish(QpStatus status, int iterations = 0) const {
    QpResult out;
    out.status = status;
    out.x = x_;
    out.iterations = iterations;
    out.multipliers_eq = VecX::Zero(p_.a_eq.rows());
    out.multipliers_in = VecX::Zero(p_.a_in.rows());
    for (const auto& a : active_) {
      if (a.equality) {
        out.multipliers_eq(a.row) = a.multiplier;
      } else {
        out.multipliers_in(a.row) = a.multiplier;
        out.active_in.push_back(a.row);
      }
    }
    std::sort(out.active_in.begin(), out.active_in.end());
    out.kkt_residual = kkt_residual(p_, out.x, out.multipliers_eq, out.multipliers_in);
    return out;
  }

  const QpProblem& p_;
  int n_;
  Eigen::LLT<MatX> llt_;
  MatX l_inv_;
  VecX x_;
  std::vector<ActiveConstraint> active_;
};

void check_shapes(const QpProblem& p) {
  const auto n = p.gradient.size();
  if (p.hessian.rows() != n || p.hessian.cols() != n) {
    throw std::invalid_argument("QP hessian shape mismatch");
  }
  if (p.a_eq.rows() != p.b_eq.size() || (p.a_eq.rows() > 0 && p.a_eq.cols() != n)) {
    throw std::invalid_argument("QP equality block shape mismatch");
  }
  if (p.a_in.rows() != p.b_in.size() || (p.a_in.rows() > 0 && p.a_in.cols() != n)) {
    throw std::invalid_argument("QP inequality block shape mismatch");
  }
}

}  // namespace

double kkt_residual(const QpProblem& p, const VecX& x, const VecX& mult_eq,
                    const VecX& mult_in) {
  VecX stationarity = p.hessian * x + p.gradient;
  if (p.a_eq.rows() > 0) stationarity -= p.a_eq.transpose() * mult_eq;
  if (p.a_in.rows() > 0) stationarity -= p.a_in.transpose() * mult_in;
  double res = stationarity.lpNorm<Eigen::Infinity>();
  if (p.a_eq.rows() > 0) res = std::max(res, (p.a_eq * x + p.b_eq).lpNorm<Eigen::Infinity>());
  if (p.a_in.rows() > 0) {
    const VecX s = p.a_in * x + p.b_in;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      res = std::max(res, -s(i));
      res = std::max(res, std::abs(mult_in(i) * s(i)));
      res = std::max(res, -mult_in(i));
    }
  }
  return res;
}

QpResult solve_qp(const QpProblem& problem) {
  check_shapes(problem);
  QpProblem p = problem;
  if (p.a_eq.rows() == 0) p.a_eq.resize(0, p.num_vars());
  if (p.a_in.rows() == 0) p.a_in.resize(0, p.num_vars());
  return ActiveSetSolver(p).run();
}

}  // namespace fic
