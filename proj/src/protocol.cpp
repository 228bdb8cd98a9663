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

#include "cascadeqkd/protocol.hpp"

#include "cascadeqkd/decoy.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cascadeqkd {

int ProtocolMaps::in_dim() const {
  return std::accumulate(in_dims.begin(), in_dims.end(), 1, std::multiplies<>());
}

int ProtocolMaps::out_dim() const {
  return std::accumulate(out_dims.begin(), out_dims.end(), 1, std::multiplies<>());
}

std::vector<CMat> alice_povm(Protocol) {
  const double pz = 0.5;
  const double px = 0.5;
  CMat plus(2, 1), minus(2, 1);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return {pz * projector(ket(2, 0)), pz * projector(ket(2, 1)), px * projector(plus),
          px * projector(minus)};
}

std::vector<CMat> bob_povm(Protocol p) {
  const double pz = 0.5;
  const double px = 0.5;
  if (p == Protocol::qubit) return alice_povm(p);
  // Squashed three-dimensional model: index 0 is vacuum, 1 and 2 the qubit.
  CMat plus = CMat::Zero(3, 1), minus = CMat::Zero(3, 1);
  plus(1, 0) = plus(2, 0) = 1.0 / std::sqrt(2.0);
  minus(1, 0) = 1.0 / std::sqrt(2.0);
  minus(2, 0) = -1.0 / std::sqrt(2.0);
  return {pz * projector(ket(3, 1)), pz * projector(ket(3, 2)), px * projector(plus),
          px * projector(minus), projector(ket(3, 0))};
}

namespace {

int bob_dim(Protocol p) { return p == Protocol::qubit ? 2 : 3; }

ProtocolMaps build_maps(Protocol p, bool with_w) {
  ProtocolMaps maps;
  maps.protocol = p;
  maps.with_w = with_w;
  const int db = bob_dim(p);
  maps.in_dims = {2, db};
  maps.out_dims = {2, 2, db, 2};
  if (with_w) maps.out_dims.push_back(2);

  const auto pa = alice_povm(p);
  const auto pb = bob_povm(p);
  const int in = 2 * db;

  // Both bases are kept after sifting; Alice's key bit is her outcome.
  for (int basis = 0; basis < 2; ++basis) {
    const CMat flag = ket(2, basis);
    if (!with_w) {
      CMat k = CMat::Zero(2 * in * 2, in);
      for (int bit = 0; bit < 2; ++bit) {
        const int x = 2 * basis + bit;
        CMat sum = CMat::Zero(in, in);
        for (int ybit = 0; ybit < 2; ++ybit) sum += kron(pa[x], pb[2 * basis + ybit]);
        k += kron({ket(2, bit), matrix_sqrt_psd(sum), flag});
      }
      maps.g_kraus.emplace_back(std::move(k));
    } else {
      for (int w = 0; w < 2; ++w) {
        CMat k = CMat::Zero(2 * in * 2 * 2, in);
        for (int bit = 0; bit < 2; ++bit) {
          const int x = 2 * basis + bit;
          const int y = 2 * basis + (bit ^ w);
          k += kron({ket(2, bit), matrix_sqrt_psd(kron(pa[x], pb[y])), flag, ket(2, w)});
        }
        maps.g_kraus.emplace_back(std::move(k));
      }
    }
  }

  const int rest = maps.out_dim() / 2;
  for (int j = 0; j < 2; ++j) {
    maps.pinch_kraus.emplace_back(kron(projector(ket(2, j)), CMat::Identity(rest, rest)));
  }
  return maps;
}

}  // namespace

ProtocolMaps build_qubit_maps(bool with_w) { return build_maps(Protocol::qubit, with_w); }
ProtocolMaps build_decoy_maps(bool with_w) { return build_maps(Protocol::decoy, with_w); }

std::vector<RegisterInfo> keymap_registers(const ProtocolMaps& maps) {
  static const char* names[] = {"Z", "A", "B", "A~", "W"};
  std::vector<RegisterInfo> out;
  for (std::size_t i = 0; i < maps.out_dims.size(); ++i) out.push_back({names[i], maps.out_dims[i]});
  return out;
}

CMat apply_g(const ProtocolMaps& maps, const CMat& rho) {
  if (rho.rows() != maps.in_dim()) throw DimensionError("apply_g: input dimension mismatch");
  CMat out = CMat::Zero(maps.out_dim(), maps.out_dim());
  for (const auto& k : maps.g_kraus) out.noalias() += k.matrix() * rho * k.matrix().adjoint();
  return out;
}

CMat apply_g_adjoint(const ProtocolMaps& maps, const CMat& x) {
  if (x.rows() != maps.out_dim()) throw DimensionError("apply_g_adjoint: dimension mismatch");
  CMat out = CMat::Zero(maps.in_dim(), maps.in_dim());
  for (const auto& k : maps.g_kraus) out.noalias() += k.matrix().adjoint() * x * k.matrix();
  return out;
}

CMat apply_pinch(const ProtocolMaps& maps, const CMat& x) {
  // The projectors are diagonal in the key register, so pinching zeroes the
  // off-diagonal key blocks.
  const int half = maps.out_dim() / 2;
  CMat out = x;
  out.block(0, half, half, half).setZero();
  out.block(half, 0, half, half).setZero();
  return out;
}

CMat kraus_completeness(const ProtocolMaps& maps) {
  CMat out = CMat::Zero(maps.in_dim(), maps.in_dim());
  for (const auto& k : maps.g_kraus) out += k.matrix().adjoint() * k.matrix();
  return out;
}

CMat cell_operator(Protocol p, int x, int y) {
  const auto pa = alice_povm(p);
  const auto pb = bob_povm(p);
  if (x < 0 || x >= 4 || y < 0 || y >= static_cast<int>(pb.size())) {
    throw std::out_of_range("cell_operator: cell index out of range");
  }
  return kron(pa[x], pb[y]);
}

std::vector<std::pair<int, int>> graining_cells(Protocol p, Graining g) {
  std::vector<std::pair<int, int>> cells;
  const int cols = p == Protocol::qubit ? 4 : 5;
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < cols; ++y) {
      const bool sifted = y < 4 && symbol_basis(x) == symbol_basis(y);
      if (g == Graining::fine || sifted) cells.emplace_back(x, y);
    }
  }
  return cells;
}

std::vector<CoarseStatistic> coarse_statistics() {
  return {
      {"Q_Z", {{0, 1}, {1, 0}}},
      {"Q_X", {{2, 3}, {3, 2}}},
      {"gain_Z", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}},
      {"gain_X", {{2, 2}, {2, 3}, {3, 2}, {3, 3}}},
  };
}

std::vector<ObservableConstraint> source_replacement_constraints(Protocol p) {
  const int db = bob_dim(p);
  const CMat ib = CMat::Identity(db, db);
  std::vector<ObservableConstraint> out;
  const char* labels[] = {"srep_x", "srep_y", "srep_z"};
  for (int j = 1; j <= 3; ++j) {
    ObservableConstraint c{HermitianOperator(kron(pauli::sigma(j), ib)), ConstraintKind::equality,
                           0.0, 0.0, 0.0, labels[j - 1]};
    out.push_back(std::move(c));
  }
  out.push_back({HermitianOperator(CMat::Identity(2 * db, 2 * db)), ConstraintKind::equality, 1.0,
                 0.0, 0.0, "trace"});
  return out;
}

namespace {

void check_block(const Eigen::MatrixXd& m, int cols) {
  if (m.rows() != 4 || m.cols() != cols) {
    throw std::invalid_argument("statistics table has missing cells");
  }
  if ((m.array() < 0.0).any()) throw std::invalid_argument("statistics table has negative entries");
}

}  // namespace

std::vector<ObservableConstraint> build_constraints(const StatisticsTable& stats, Graining graining,
                                                    Protocol protocol, ConstraintMode mode) {
  if (stats.protocol != protocol) throw std::invalid_argument("statistics table protocol mismatch");

  std::vector<ObservableConstraint> out;
  if (protocol == Protocol::decoy && mode == ConstraintMode::interval) {
    if (stats.blocks.empty()) throw std::invalid_argument("statistics table has missing cells");
    for (const auto& b : stats.blocks) check_block(b, 5);
    out = assemble_interval_constraints(solve_yield_bounds(stats, PhotonCutoff{}), graining);
  } else {
    if (protocol == Protocol::qubit && mode == ConstraintMode::interval) {
      throw std::invalid_argument("qubit constraints are equalities");
    }
    if (stats.blocks.size() != 1) throw std::invalid_argument("expected exactly one table block");
    const auto& t = stats.blocks[0];
    check_block(t, protocol == Protocol::qubit ? 4 : 5);
    if (graining == Graining::coarse) {
      for (const auto& cs : coarse_statistics()) {
        CMat op = CMat::Zero(2 * bob_dim(protocol), 2 * bob_dim(protocol));
        double value = 0.0;
        for (auto [x, y] : cs.cells) {
          op += cell_operator(protocol, x, y);
          value += t(x, y);
        }
        out.push_back({HermitianOperator(op), ConstraintKind::equality, value, 0.0, 0.0, cs.label});
      }
    } else {
      for (auto [x, y] : graining_cells(protocol, graining)) {
        out.push_back({HermitianOperator(cell_operator(protocol, x, y)), ConstraintKind::equality,
                       t(x, y), 0.0, 0.0, cell_label(x, y)});
      }
    }
  }
  for (auto& c : source_replacement_constraints(protocol)) out.push_back(std::move(c));
  return out;
}

}  // namespace cascadeqkd
