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

#include "cascadeqkd/sdp.hpp"

#include "gtest/gtest.h"
#include "oracles.hpp"

#include <random>

using namespace cascadeqkd;

namespace {

CMat random_hermitian(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  CMat g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = {n(rng), n(rng)};
  }
  return 0.5 * (g + g.adjoint());
}

CMat random_state(std::mt19937_64& rng, int d) {
  const CMat h = random_hermitian(rng, d);
  CMat r = h * h;
  return r / r.trace().real();
}

SdpProblem unit_trace(const CMat& cost) {
  SdpProblem p;
  p.cost = cost;
  p.eq_ops.push_back(CMat::Identity(cost.rows(), cost.cols()));
  p.eq_rhs.push_back(1.0);
  return p;
}

}  // namespace

TEST(Sdp, unit_trace_gives_smallest_eigenvalue) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat c = random_hermitian(rng, 4);
    Eigen::SelfAdjointEigenSolver<CMat> es(c);
    const SdpResult r = solve_linear_sdp(unit_trace(c));
    ASSERT_EQ(r.status, SdpStatus::optimal) << r.message;
    EXPECT_NEAR(r.primal, es.eigenvalues()(0), 1e-7);
    EXPECT_LE(r.certified_lower, es.eigenvalues()(0) + 1e-12);
    EXPECT_NEAR(r.certified_lower, es.eigenvalues()(0), 1e-7);
  }
}

TEST(Sdp, bloch_ball_with_interval) {
  // min z subject to 0.2 <= x <= 0.3 on the Bloch ball: z = -sqrt(1 - 0.2^2).
  SdpProblem p = unit_trace(CMat(pauli::z()));
  p.iv_ops.push_back(pauli::x());
  p.iv_low.push_back(0.2);
  p.iv_high.push_back(0.3);
  const SdpResult r = solve_linear_sdp(p);
  ASSERT_EQ(r.status, SdpStatus::optimal) << r.message;
  EXPECT_NEAR(r.primal, -std::sqrt(0.96), 1e-6);
  EXPECT_LE(r.certified_lower, -std::sqrt(0.96) + 1e-12);
  EXPECT_LT(r.max_residual, 1e-8);
}

TEST(Sdp, inconsistent_equalities_are_infeasible) {
  SdpProblem p = unit_trace(CMat(pauli::z()));
  p.eq_ops.push_back(CMat::Identity(2, 2));
  p.eq_rhs.push_back(2.0);
  EXPECT_EQ(solve_linear_sdp(p).status, SdpStatus::infeasible);
}

TEST(Sdp, psd_infeasible_is_detected) {
  SdpProblem p = unit_trace(CMat::Zero(2, 2));
  p.eq_ops.push_back(pauli::z());
  p.eq_rhs.push_back(1.5);
  EXPECT_FALSE(find_interior_point(p).feasible);
}

TEST(Sdp, interior_point_of_singleton) {
  // Only |0><0| satisfies Tr(Z rho) = 1.
  SdpProblem p = unit_trace(CMat::Zero(2, 2));
  p.eq_ops.push_back(pauli::z());
  p.eq_rhs.push_back(1.0);
  const InteriorPoint ip = find_interior_point(p);
  ASSERT_TRUE(ip.feasible) << ip.message;
  EXPECT_NEAR(ip.min_eig, 0.0, 1e-7);
  EXPECT_NEAR(std::abs(ip.x(0, 0)), 1.0, 1e-7);
}

TEST(Sdp, random_programs_property) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 15; ++trial) {
    const int d = 4;
    const CMat rho0 = random_state(rng, d);
    SdpProblem p = unit_trace(random_hermitian(rng, d));
    for (int k = 0; k < 3; ++k) {
      const CMat a = random_hermitian(rng, d);
      p.eq_ops.push_back(a);
      p.eq_rhs.push_back(hs_inner(a, rho0));
      const CMat b = random_hermitian(rng, d);
      const double v = hs_inner(b, rho0);
      p.iv_ops.push_back(b);
      p.iv_low.push_back(v - 0.1);
      p.iv_high.push_back(v + 0.1);
    }
    const SdpResult r = solve_linear_sdp(p);
    ASSERT_EQ(r.status, SdpStatus::optimal) << r.message;
    EXPECT_LE(r.primal, hs_inner(p.cost, rho0) + 1e-8);
    EXPECT_LE(r.certified_lower, r.primal + 1e-9);
    EXPECT_LT(r.primal - r.certified_lower, 1e-6);
    EXPECT_LT(constraint_residual(p, r.x), 1e-8);
    EXPECT_GE(min_eigenvalue(r.x), -1e-9);
  }
}

TEST(Sdp, pinned_projector_restricts_to_face) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat c = random_hermitian(rng, 5);
    SdpProblem p = unit_trace(c);
    CMat proj = CMat::Zero(5, 5);
    proj(0, 0) = 1.0;
    proj(1, 1) = 1.0;
    p.iv_ops.push_back(proj);
    p.iv_low.push_back(0.0);
    p.iv_high.push_back(trial % 2 ? 1e-16 : 0.0);
    Eigen::SelfAdjointEigenSolver<CMat> es(CMat(c.bottomRightCorner(3, 3)));
    const double oracle = es.eigenvalues()(0);
    const SdpResult r = solve_linear_sdp(p);
    ASSERT_EQ(r.status, SdpStatus::optimal) << r.message;
    EXPECT_NEAR(r.primal, oracle, 1e-7);
    EXPECT_LE(r.certified_lower, oracle + 1e-9) << r.certified_lower - oracle;
    EXPECT_NEAR(r.certified_lower, oracle, 1e-6);
    EXPECT_LE(r.max_residual, 1e-9);
    const InteriorPoint ip = find_interior_point(p);
    ASSERT_TRUE(ip.feasible) << ip.message;
    EXPECT_LE(ip.max_residual, 1e-9);
    EXPECT_GT(min_eigenvalue(CMat(ip.x.bottomRightCorner(3, 3))), 0.1);
  }
}
