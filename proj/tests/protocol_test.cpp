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

#include "cascadeqkd/channel.hpp"
#include "cascadeqkd/protocol.hpp"

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

// Sifting projector built from basis-choice probabilities 1/2 on each side.
CMat expected_completeness(Protocol p) {
  const int db = p == Protocol::qubit ? 2 : 3;
  CMat qubit_b = CMat::Zero(db, db);
  qubit_b.bottomRightCorner(2, 2).setIdentity();  // vacuum is index 0
  return 0.5 * kron(CMat::Identity(2, 2), qubit_b);
}

}  // namespace

TEST(Protocol, dimensions) {
  for (bool w : {false, true}) {
    const ProtocolMaps q = build_qubit_maps(w);
    const ProtocolMaps d = build_decoy_maps(w);
    EXPECT_EQ(q.in_dim(), 4);
    EXPECT_EQ(d.in_dim(), 6);
    // Z, A (x) B, basis flag, optional W.
    EXPECT_EQ(q.out_dim(), 2 * 4 * 2 * (w ? 2 : 1));
    EXPECT_EQ(d.out_dim(), 2 * 6 * 2 * (w ? 2 : 1));
    EXPECT_EQ(q.with_w, w);
    const auto regs = keymap_registers(q);
    EXPECT_EQ(regs.front().name, "Z");
    if (w) EXPECT_EQ(regs.back().name, "W");
  }
}

TEST(Protocol, kraus_completeness_is_sifting_projector) {
  for (bool w : {false, true}) {
    EXPECT_LT(max_abs_diff(kraus_completeness(build_qubit_maps(w)), expected_completeness(Protocol::qubit)), 1e-14);
    EXPECT_LT(max_abs_diff(kraus_completeness(build_decoy_maps(w)), expected_completeness(Protocol::decoy)), 1e-14);
  }
}

TEST(Protocol, adjoint_property) {
  std::mt19937_64 rng(29);
  for (bool w : {false, true}) {
    for (const ProtocolMaps& m : {build_qubit_maps(w), build_decoy_maps(w)}) {
      for (int trial = 0; trial < 5; ++trial) {
        const CMat rho = random_state(rng, m.in_dim());
        const CMat x = random_state(rng, m.out_dim());
        EXPECT_NEAR(hs_inner(x, apply_g(m, rho)), hs_inner(apply_g_adjoint(m, x), rho), 1e-13);
        EXPECT_NEAR(apply_g(m, rho).trace().real(), hs_inner(kraus_completeness(m), rho), 1e-13);
      }
    }
  }
}

TEST(Protocol, pinching_idempotent_and_trace_preserving) {
  std::mt19937_64 rng(31);
  const ProtocolMaps m = build_qubit_maps(true);
  const CMat g = apply_g(m, random_state(rng, 4));
  const CMat z = apply_pinch(m, g);
  EXPECT_LT(max_abs_diff(apply_pinch(m, z), z), 1e-15);
  EXPECT_NEAR(z.trace().real(), g.trace().real(), 1e-14);
  const int half = m.out_dim() / 2;
  EXPECT_LT(z.topRightCorner(half, half).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Protocol, w_register_keeps_key_and_basis_marginal) {
  std::mt19937_64 rng(37);
  for (Protocol p : {Protocol::qubit, Protocol::decoy}) {
    const ProtocolMaps plain = p == Protocol::qubit ? build_qubit_maps(false) : build_decoy_maps(false);
    const ProtocolMaps with = p == Protocol::qubit ? build_qubit_maps(true) : build_decoy_maps(true);
    const CMat rho = random_state(rng, plain.in_dim());
    const int db = plain.in_dims[1];
    // Explicit reduction to (Z, basis flag) by index arithmetic.
    auto key_basis = [&](const CMat& g, int w_dim) {
      CMat out = CMat::Zero(4, 4);
      const int ab = 2 * db;
      for (int z1 = 0; z1 < 2; ++z1)
        for (int f1 = 0; f1 < 2; ++f1)
          for (int z2 = 0; z2 < 2; ++z2)
            for (int f2 = 0; f2 < 2; ++f2)
              for (int k = 0; k < ab; ++k)
                for (int w = 0; w < w_dim; ++w) {
                  const int r = ((z1 * ab + k) * 2 + f1) * w_dim + w;
                  const int c = ((z2 * ab + k) * 2 + f2) * w_dim + w;
                  out(z1 * 2 + f1, z2 * 2 + f2) += g(r, c);
                }
      return out;
    };
    EXPECT_LT(max_abs_diff(key_basis(apply_g(with, rho), 2), key_basis(apply_g(plain, rho), 1)), 1e-14);
  }
}

TEST(Protocol, cells_form_a_povm) {
  for (Protocol p : {Protocol::qubit, Protocol::decoy}) {
    const int cols = p == Protocol::qubit ? 4 : 5;
    const int d = p == Protocol::qubit ? 4 : 6;
    CMat sum = CMat::Zero(d, d);
    for (int x = 0; x < 4; ++x) {
      for (int y = 0; y < cols; ++y) {
        EXPECT_TRUE(is_psd(cell_operator(p, x, y)));
        sum += cell_operator(p, x, y);
      }
    }
    // The vacuum flag of Bob's squashed space is counted once per symbol.
    if (p == Protocol::qubit) EXPECT_LT(max_abs_diff(sum, CMat::Identity(d, d)), 1e-14);
    else EXPECT_TRUE(is_psd(CMat(CMat::Identity(d, d) - sum)));
  }
}

TEST(Protocol, noiseless_cells_match_oracle_table) {
  CMat phi = CMat::Zero(4, 1);
  phi(0, 0) = phi(3, 0) = 1.0 / std::sqrt(2.0);
  const CMat rho = phi * phi.adjoint();
  const Eigen::Matrix4d t = oracle::qubit_table(0.0, 0.0);
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 4; ++y) EXPECT_NEAR(hs_inner(cell_operator(Protocol::qubit, x, y), rho), t(x, y), 1e-15);
  }
}

TEST(Protocol, constraint_counts) {
  const auto t = simulate_qubit_table(ChannelScenario{});
  EXPECT_EQ(build_constraints(t, Graining::fine, Protocol::qubit, ConstraintMode::equality).size(), 16u + 4u);
  EXPECT_EQ(build_constraints(t, Graining::sifted_fine, Protocol::qubit, ConstraintMode::equality).size(), 8u + 4u);
  EXPECT_EQ(build_constraints(t, Graining::coarse, Protocol::qubit, ConstraintMode::equality).size(), 4u + 4u);
  EXPECT_EQ(source_replacement_constraints(Protocol::decoy).size(), 4u);
  EXPECT_EQ(coarse_statistics().size(), 4u);
}

TEST(Protocol, constraints_hold_on_generating_state) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 10; ++trial) {
    const double theta = 0.4 * u(rng), q = 0.3 * u(rng);
    ChannelScenario sc;
    sc.theta = theta;
    sc.q = q;
    const auto t = simulate_qubit_table(sc);
    const CMat rho = qubit_channel_state(theta, q);
    for (Graining g : {Graining::fine, Graining::sifted_fine, Graining::coarse}) {
      for (const auto& c : build_constraints(t, g, Protocol::qubit, ConstraintMode::equality)) {
        EXPECT_NEAR(hs_inner(c.gamma_op.matrix(), rho), c.value, 1e-14) << c.label;
      }
    }
  }
}

TEST(Protocol, decoy_interval_constraints_are_intervals) {
  ChannelScenario sc;
  sc.protocol = Protocol::decoy;
  sc.intensities = {0.5, 0.1, 0.001};
  sc.eta = 0.5;
  const auto cons = build_constraints(simulate_decoy_tables(sc), Graining::fine, Protocol::decoy,
                                      ConstraintMode::interval);
  int intervals = 0;
  for (const auto& c : cons) {
    if (c.kind == ConstraintKind::interval) {
      ++intervals;
      EXPECT_LE(c.low, c.high);
    }
  }
  EXPECT_EQ(intervals, 20);
}
