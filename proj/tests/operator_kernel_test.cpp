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

#include "cascadeqkd/operator_kernel.hpp"

#include "gtest/gtest.h"
#include "oracles.hpp"

#include <random>

using namespace cascadeqkd;

namespace {

CMat random_state(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  CMat g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = {n(rng), n(rng)};
  }
  CMat r = g * g.adjoint();
  return r / r.trace().real();
}

}  // namespace

TEST(OperatorKernel, hermitian_rejects_non_hermitian) {
  CMat m = CMat::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(HermitianOperator{m}, NotHermitianError);
  EXPECT_THROW(HermitianOperator{CMat(2, 3)}, DimensionError);
  const HermitianOperator h = HermitianOperator::hermitian_part(m);
  EXPECT_NEAR(std::abs(h.matrix()(1, 0) - cdouble(0.5)), 0.0, 1e-15);
}

TEST(OperatorKernel, density_operator_contract) {
  EXPECT_THROW(DensityOperator{CMat(pauli::z())}, std::invalid_argument);
  EXPECT_THROW(DensityOperator{CMat(pauli::identity())}, std::invalid_argument);
  const DensityOperator rho(CMat(0.5 * pauli::identity()));
  EXPECT_DOUBLE_EQ(rho.trace(), 1.0);
}

TEST(OperatorKernel, kron_matches_index_formula) {
  std::mt19937_64 rng(3);
  const CMat a = random_state(rng, 2), b = random_state(rng, 3);
  const CMat k = kron(a, b);
  ASSERT_EQ(k.rows(), 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(std::abs(k(i, j) - a(i / 3, j / 3) * b(i % 3, j % 3)), 0.0, 1e-15);
  }
  const CMat k3 = kron({a, b, a});
  EXPECT_LT(max_abs_diff(k3, kron(kron(a, b), a)), 1e-15);
}

TEST(OperatorKernel, partial_trace_property) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat r = random_state(rng, 6);
    const int dims[] = {2, 3};
    const int keep_a[] = {0};
    const int keep_b[] = {1};
    EXPECT_LT(max_abs_diff(partial_trace(r, dims, keep_a), oracle::trace_out_second(r, 2, 3)), 1e-14);
    EXPECT_LT(max_abs_diff(partial_trace(r, dims, keep_b), oracle::trace_out_first(r, 2, 3)), 1e-14);
  }
  const int dims[] = {2, 2};
  const int bad[] = {2};
  EXPECT_THROW(partial_trace(CMat::Identity(4, 4), dims, bad), DimensionError);
}

TEST(OperatorKernel, partial_trace_three_registers) {
  std::mt19937_64 rng(7);
  const CMat a = random_state(rng, 2), b = random_state(rng, 3), c = random_state(rng, 2);
  const int dims[] = {2, 3, 2};
  const int keep[] = {0, 2};
  EXPECT_LT(max_abs_diff(partial_trace(kron({a, b, c}), dims, keep), kron(a, c)), 1e-14);
}

TEST(OperatorKernel, entropy_against_eigen_oracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat r = random_state(rng, 5);
    EXPECT_NEAR(entropy2(r), oracle::vn_entropy(r), 1e-12);
  }
  EXPECT_NEAR(entropy2(CMat(0.25 * CMat::Identity(4, 4))), 2.0, 1e-14);
  EXPECT_NEAR(entropy2(CMat(projector(ket(3, 1)))), 0.0, 1e-14);
}

TEST(OperatorKernel, unitary_invariance_property) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat r = random_state(rng, 4);
    const CMat u = oracle::random_unitary(rng, 4);
    EXPECT_NEAR(entropy2(CMat(u * r * u.adjoint())), entropy2(r), 1e-12);
    EXPECT_NEAR(min_eigenvalue(CMat(u * r * u.adjoint())), min_eigenvalue(r), 1e-12);
  }
}

TEST(OperatorKernel, log_exp_roundtrip) {
  std::mt19937_64 rng(17);
  const CMat r = random_state(rng, 4);
  EXPECT_LT(max_abs_diff(matrix_exp2(matrix_log2(r)), r), 1e-12);
  const CMat s = matrix_sqrt_psd(r);
  EXPECT_LT(max_abs_diff(s * s, r), 1e-12);
  const Spectrum sp = eigh(r);
  EXPECT_LT(max_abs_diff(sp.vectors * sp.values.cast<cdouble>().asDiagonal() * sp.vectors.adjoint(), r), 1e-12);
}

TEST(OperatorKernel, relative_entropy_properties) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityOperator x(random_state(rng, 3)), y(random_state(rng, 3));
    EXPECT_GE(rel_entropy2(x, y).bits, -1e-12);
    EXPECT_NEAR(rel_entropy2(x, x).bits, 0.0, 1e-10);
  }
  // Support mismatch is reported instead of returning infinity.
  const DensityOperator p0(CMat(projector(ket(2, 0))));
  const DensityOperator p1(CMat(projector(ket(2, 1))));
  const auto r = rel_entropy2(p0, p1);
  EXPECT_FALSE(r.support_ok);
  EXPECT_NEAR(r.support_defect, 1.0, 1e-12);
}

TEST(OperatorKernel, binary_entropy_values) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), 1.0, 1e-15);
  for (double p : {0.01, 0.11, 0.3}) EXPECT_NEAR(binary_entropy(p), oracle::h2(p), 1e-15);
}

TEST(OperatorKernel, pauli_algebra) {
  EXPECT_LT(max_abs_diff(pauli::x() * pauli::y(), cdouble(0, 1) * pauli::z()), 1e-15);
  for (int i = 0; i < 4; ++i) EXPECT_LT(max_abs_diff(pauli::sigma(i) * pauli::sigma(i), pauli::identity()), 1e-15);
  EXPECT_THROW(pauli::sigma(4), std::out_of_range);
}

TEST(OperatorKernel, real_vector_preserves_inner_product) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat a = random_state(rng, 3), b = random_state(rng, 3);
    EXPECT_NEAR(to_real_vec(a).dot(to_real_vec(b)), hs_inner(a, b), 1e-14);
    EXPECT_LT(max_abs_diff(from_real_vec(to_real_vec(a), 3), a), 1e-15);
  }
}
