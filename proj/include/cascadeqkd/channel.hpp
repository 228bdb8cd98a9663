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

// Acceptance-test statistics for configurable channels.
//
// Qubit BB84: the source-replacement Bell pair passes through a Y-rotation
// by theta on Bob's side and then depolarization of strength q.
//
// Decoy BB84 (our own optical model): Alice sends a phase-randomized coherent
// pulse of intensity mu polarized along her symbol. The channel rotates the
// polarization by theta and has transmittance eta. Bob splits passively 50/50
// into Z and X arms, each ending in two threshold detectors that click
// independently with probability 1 - exp(-mean photon number arriving).
// Outcome assignment: no click -> no detection; a single click -> its bit;
// a double click inside one arm -> uniformly random bit of that basis; clicks
// in both arms -> the basis is chosen uniformly and resolved as above.
// Dark counts and detector asymmetries are not modelled.
//
// Both protocols optionally replace the state leaving Alice's lab by the H
// signal with probability lambda_rep, which mixes every table row with the H
// row.

#include "cascadeqkd/operator_kernel.hpp"
#include "cascadeqkd/statistics.hpp"

#include <vector>

namespace cascadeqkd {

struct ChannelScenario {
  Protocol protocol = Protocol::qubit;
  double theta = 0.0;       // radians
  double q = 0.0;           // depolarization probability (qubit only)
  double lambda_rep = 0.0;  // replacement probability
  double eta = 1.0;         // transmittance (decoy only)
  std::vector<double> intensities;  // decoy only, strictly decreasing

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// rho_AB = depolarize_q(U(theta) phi+ U(theta)^dagger).
CMat qubit_channel_state(double theta, double q);

StatisticsTable simulate_qubit_table(const ChannelScenario& s);
StatisticsTable simulate_decoy_tables(const ChannelScenario& s);

/// Joint single-photon probabilities gamma^1_{x,y} = Pr(x) gamma^1_{y|x} of
/// the one-photon branch of the decoy model (one 4x5 block).
StatisticsTable single_photon_truth(const ChannelScenario& s);

/// Row mixing (1 - lambda) gamma_x + lambda gamma_H on every block.
StatisticsTable apply_replacement(StatisticsTable t, double lambda);

/// Conditional yields gamma_{y|x} = gamma_{x,y} / Pr(x) of one block.
Eigen::MatrixXd conditional_yields(const Eigen::MatrixXd& joint);

}  // namespace cascadeqkd
