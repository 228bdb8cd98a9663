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

// Twirling over {I, XX, YY, ZZ}, symmetry predicates on qubit statistics, the
// Bell-diagonal restricted minimization used as an independent oracle, and
// the block-diagonality of Eve's conditional states for Bell-diagonal inputs.

#include "cascadeqkd/operator_kernel.hpp"
#include "cascadeqkd/protocol.hpp"
#include "cascadeqkd/statistics.hpp"

#include <array>
#include <random>

namespace cascadeqkd {

/// Weights on |phi+>, |phi->, |psi+>, |psi->. With this ordering the Z-basis
/// error rate is l2 + l3 and the X-basis error rate is l1 + l3.
struct BellDiagonalState {
  std::array<double, 4> lambdas{1.0, 0.0, 0.0, 0.0};

  /// Throws std::invalid_argument unless the weights form a distribution.
  void validate() const;
  double qber_z() const { return lambdas[2] + lambdas[3]; }
  double qber_x() const { return lambdas[1] + lambdas[3]; }
  CMat matrix() const;
};

/// Bell basis vectors |phi+>, |phi->, |psi+>, |psi-> as columns.
CMat bell_basis();

/// T(rho) = 1/4 sum_i (s_i x s_i) rho (s_i x s_i).
DensityOperator twirl(const DensityOperator& rho);
CMat twirl(const CMat& rho);

/// The twirl is self-adjoint; kept separate to mirror its role on observables.
HermitianOperator twirl_adjoint(const HermitianOperator& gamma);

/// Bell-basis weights of the twirled state (diagonal in the Bell basis).
BellDiagonalState bell_weights(const CMat& rho);

/// True iff the table satisfies, to `tol`, the equalities under which the
/// twirl leaves the constraints of `graining` invariant. Coarse statistics are
/// always invariant.
bool statistics_symmetric(const StatisticsTable& table, Graining graining, double tol = 1e-9);

/// Closed form of f for a Bell-diagonal state with key from both bases,
/// p_z = p_x = 1/2:  1/4 sum_b (1 - H(lambda) + h(e_b)).
double bell_objective(const BellDiagonalState& s);

struct BellMinimum {
  double value = 0.0;
  BellDiagonalState argmin;
};

/// Minimum of bell_objective over Bell-diagonal states with the given
/// conditional error rates: grid of step 1e-3 in lambda_3, then ternary
/// refinement to 1e-6. Throws std::invalid_argument when infeasible.
BellMinimum bell_minimize(double e_z, double e_x);

enum class MeasureBasis { z, x, y };

/// Largest singular value of the cross-Gram matrix between the supports of
/// Eve's operators {rho_E^{00}, rho_E^{11}} and {rho_E^{01}, rho_E^{10}} in the
/// purification sum_i sqrt(l_i) |B_i>|i>, both parties measuring `basis`.
double eve_block_diagonality(const BellDiagonalState& s, MeasureBasis basis);

/// f(T(rho)) <= f(rho) + 1e-9 for qubit maps.
bool twirl_decreases_objective(const DensityOperator& rho, const ProtocolMaps& maps);

/// Random two-qubit state with Alice's marginal I/2, i.e. satisfying the
/// source-replacement constraints: rho' = (M x I) rho (M x I), M = (2 rho_A)^{-1/2}.
CMat random_source_state(std::mt19937_64& rng, int bob_dim = 2);

/// Haar-like random density matrix of full rank.
CMat random_density(std::mt19937_64& rng, int dim);

/// Random Hermitian matrix with standard normal entries.
CMat random_hermitian(std::mt19937_64& rng, int dim);

}  // namespace cascadeqkd
