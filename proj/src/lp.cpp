// Copyright 2026 The cascadeqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cascadeqkd/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cascadeqkd {

namespace {

constexpr double kPivotTol = 1e-11;

// Tableau with rows 0..m-1 constraints and row m the reduced costs; the last
// column is the right-hand side.
struct Tableau {
  Eigen::MatrixXd t;
  std::vector<int> basis;
  int m, n;

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int r = 0; r <= m; ++r) {
      if (r != row && t(r, col) != 0.0) t.row(r) -= t(r, col) * t.row(row);
    }
    basis[row] = col;
  }

  // Bland's rule. `allowed` limits entering columns.
  LpStatus run(int allowed, int max_pivots, int& pivots) {
    while (pivots < max_pivots) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        if (t(m, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        if (t(r, enter) > kPivotTol) {
          const double ratio = t(r, n) / t(r, enter);
          if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
      ++pivots;
    }
    return LpStatus::iteration_limit;
  }
};

}  // namespace

LpResult solve_standard_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           int max_pivots) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (c.size() != n || b.size() != m) throw std::invalid_argument("solve_standard_lp: shape mismatch");

  // Phase I on [A | I] with nonnegative right-hand side.
  Tableau tab;
  tab.m = m;
  tab.n = n + m;
  tab.t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tab.basis.resize(m);
  for (int r = 0; r < m; ++r) {
    const double s = b(r) < 0.0 ? -1.0 : 1.0;
    tab.t.row(r).head(n) = s * a.row(r);
    tab.t(r, n + r) = 1.0;
    tab.t(r, n + m) = s * b(r);
    tab.basis[r] = n + r;
  }
  for (int r = 0; r < m; ++r) tab.t.row(m) -= tab.t.row(r);
  for (int r = 0; r < m; ++r) tab.t(m, n + r) = 0.0;

  LpResult res;
  LpStatus st = tab.run(n + m, max_pivots, res.pivots);
  if (st == LpStatus::iteration_limit) return res;
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (-tab.t(m, n + m) > 1e-9 * scale) {
    res.status = LpStatus::infeasible;
    return res;
  }
  // Drive artificial variables out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.t(r, j)) > kPivotTol) {
        tab.pivot(r, j);
        break;
      }
    }
  }

  // Phase II: artificial columns are barred from entering.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = c.transpose();
  for (int r = 0; r < m; ++r) {
    const int j = tab.basis[r];
    if (j < n && c(j) != 0.0) tab.t.row(m) -= c(j) * tab.t.row(r);
  }
  st = tab.run(n, max_pivots, res.pivots);
  res.status = st;
  if (st != LpStatus::optimal) return res;

  res.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < n) res.x(tab.basis[r]) = tab.t(r, n + m);
  }
  res.objective = c.dot(res.x);
  // Reduced costs of the artificial columns give -y (with the row sign flips).
  res.y.resize(m);
  for (int r = 0; r < m; ++r) {
    const double s = b(r) < 0.0 ? -1.0 : 1.0;
    res.y(r) = -s * tab.t(m, n + r);
  }
  return res;
}

}  // namespace cascadeqkd
