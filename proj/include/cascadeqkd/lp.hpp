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

#pragma once

// Dense two-phase simplex for small standard-form linear programs:
//   minimize c.x  subject to  A x = b,  x >= 0.

#include <Eigen/Dense>

namespace cascadeqkd {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  Eigen::VectorXd x;  // primal vertex
  Eigen::VectorXd y;  // row multipliers: c - A^T y >= 0 at optimality
  double objective = 0.0;
  int pivots = 0;
};

LpResult solve_standard_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           int max_pivots = 10000);

}  // namespace cascadeqkd
