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

// Dense primal-dual interior-point routine for small linear-objective
// semidefinite programs over density operators:
//
//   minimize  Tr(C X)
//   s.t.      Tr(A_i X) = b_i,   L_j <= Tr(B_j X) <= U_j,   X >= 0.
//
// Every problem handed to this routine fixes Tr X = 1 through its equality
// set, which is what makes the certified dual bound below valid.

#include "cascadeqkd/operator_kernel.hpp"

#include <string>
#include <vector>

namespace cascadeqkd {

struct SdpProblem {
  CMat cost;
  std::vector<CMat> eq_ops;
  std::vector<double> eq_rhs;
  std::vector<CMat> iv_ops;
  std::vector<double> iv_low;
  std::vector<double> iv_high;

  int dim() const { return static_cast<int>(cost.rows()); }
};

struct SdpOptions {
  double tol = 1e-11;
  /// A run that stalls at rounding level counts as optimal below this merit.
  double accept_tol = 1e-9;
  int max_iters = 120;
};

enum class SdpStatus { optimal, infeasible, not_converged };

struct SdpResult {
  SdpStatus status = SdpStatus::not_converged;
  CMat x;
  double primal = 0.0;
  /// Lower bound on the optimum from the dual multipliers, valid for any
  /// multipliers: sum y b + sum (y_L L + y_U U) + lambda_min(C - sum y A).
  double certified_lower = 0.0;
  /// Largest violation of an equality or interval constraint at x.
  double max_residual = 0.0;
  int iterations = 0;
  std::string message;
};

/// Minimizes the linear objective. Equality constraints are checked for
/// consistency first; inconsistent systems are reported as infeasible.
SdpResult solve_linear_sdp(const SdpProblem& p, const SdpOptions& opts = {});

struct InteriorPoint {
  bool feasible = false;
  CMat x;
  /// Largest t with X - t I >= 0 among X satisfying the affine constraints.
  double min_eig = 0.0;
  double max_residual = 0.0;
  std::string message;
};

/// Maximizes the smallest eigenvalue subject to the affine constraints
/// (the cost of `p` is ignored). Infeasible when the optimum is below -tol.
InteriorPoint find_interior_point(const SdpProblem& p, double tol = 1e-7, const SdpOptions& opts = {});

/// max |Tr(A_i X) - b_i| and interval violations.
double constraint_residual(const SdpProblem& p, const CMat& x);

}  // namespace cascadeqkd
