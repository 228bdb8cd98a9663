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

// Kraus representations of the post-processing map G, the key-register
// pinching Z, and the acceptance-test constraint sets for qubit BB84 and the
// single-photon part of decoy-state BB84.

#include "cascadeqkd/operator_kernel.hpp"
#include "cascadeqkd/statistics.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cascadeqkd {

struct RegisterInfo {
  std::string name;
  int dim;
  bool operator==(const RegisterInfo&) const = default;
};

struct ProtocolMaps {
  Protocol protocol = Protocol::qubit;
  std::vector<KrausOperator> g_kraus;
  std::vector<KrausOperator> pinch_kraus;
  std::vector<int> in_dims;   // {A, B}
  std::vector<int> out_dims;  // {Z, A, B, A~} or {Z, A, B, A~, W}
  bool with_w = false;
  double p_z = 0.5;
  double p_x = 0.5;

  int in_dim() const;
  int out_dim() const;
};

ProtocolMaps build_qubit_maps(bool with_w);
ProtocolMaps build_decoy_maps(bool with_w);

/// (name, dimension) of each output register, in tensor order.
std::vector<RegisterInfo> keymap_registers(const ProtocolMaps& maps);

/// rho -> sum_i K_i rho K_i^dagger.
CMat apply_g(const ProtocolMaps& maps, const CMat& rho);
/// Adjoint of apply_g: X -> sum_i K_i^dagger X K_i.
CMat apply_g_adjoint(const ProtocolMaps& maps, const CMat& x);
/// Key-register pinching on the output space.
CMat apply_pinch(const ProtocolMaps& maps, const CMat& x);
/// sum_i K_i^dagger K_i on the input space.
CMat kraus_completeness(const ProtocolMaps& maps);

/// Alice's and Bob's measurement operators, indexed by table symbol.
/// Alice: 4 operators on C^2 (weighted by basis probability). Bob: 4 operators
/// for qubit BB84, 5 (last = no detection) for the squashed decoy model.
std::vector<CMat> alice_povm(Protocol p);
std::vector<CMat> bob_povm(Protocol p);

enum class ConstraintKind { equality, interval };

struct ObservableConstraint {
  HermitianOperator gamma_op;  // acts on A (x) B
  ConstraintKind kind = ConstraintKind::equality;
  double value = 0.0;  // equality
  double low = 0.0;    // interval
  double high = 0.0;
  std::string label;
};

enum class ConstraintMode { equality, interval };

/// POVM element of the table cell (x, y): P^A_x (x) P^B_y.
CMat cell_operator(Protocol p, int x, int y);

/// Acceptance-test constraints for a graining, followed by the three
/// source-replacement constraints and unit trace.
///
/// qubit: `stats` is a 4x4 table, mode must be equality.
/// decoy, equality: `stats` holds one 4x5 table of single-photon joint
///   probabilities.
/// decoy, interval: `stats` holds the per-intensity tables; single-photon
///   bounds are obtained from the decoy linear programs.
std::vector<ObservableConstraint> build_constraints(const StatisticsTable& stats, Graining graining,
                                                    Protocol protocol, ConstraintMode mode);

/// Tr(sigma_j (x) I_B rho) = 0 for j = x, y, z and Tr(rho) = 1.
std::vector<ObservableConstraint> source_replacement_constraints(Protocol p);

/// Indices (x, y) of the cells used by a graining. Coarse graining is not a
/// subset of cells; it returns the cells summed by the four coarse statistics.
std::vector<std::pair<int, int>> graining_cells(Protocol p, Graining g);

/// Coarse statistics as sums of cells: Q_Z, Q_X, gain_Z, gain_X.
struct CoarseStatistic {
  std::string label;
  std::vector<std::pair<int, int>> cells;
};
std::vector<CoarseStatistic> coarse_statistics();

}  // namespace cascadeqkd
