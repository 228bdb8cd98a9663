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

#include "cascadeqkd/symmetry.hpp"

#include "cascadeqkd/keyrate_solver.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cascadeqkd {

namespace {

CMat herm(const CMat& m) { return 0.5 * (m + m.adjoint()); }

double shannon(const std::array<double, 4>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

void require_two_qubits(const CMat& m) {
  if (m.rows() != 4 || m.cols() != 4) throw DimensionError("twirl: two-qubit operator required");
}

// Orthonormal basis of the range of a PSD operator.
CMat support(const CMat& x, double rel_tol = 1e-10) {
  const Spectrum s = eigh(herm(x));
  const double top = s.values.size() ? s.values.maxCoeff() : 0.0;
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    if (s.values(i) > rel_tol * std::max(top, 1e-300) && s.values(i) > 1e-300) keep.push_back(static_cast<int>(i));
  }
  CMat q(x.rows(), keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) q.col(k) = s.vectors.col(keep[k]);
  return q;
}

}  // namespace

void BellDiagonalState::validate() const {
  double sum = 0.0;
  for (double v : lambdas) {
    if (v < -1e-12) throw std::invalid_argument("Bell-diagonal weights must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("Bell-diagonal weights must sum to 1");
}

CMat bell_basis() {
  const double r = 1.0 / std::sqrt(2.0);
  CMat b = CMat::Zero(4, 4);
  b(0, 0) = r;  // phi+
  b(3, 0) = r;
  b(0, 1) = r;  // phi-
  b(3, 1) = -r;
  b(1, 2) = r;  // psi+
  b(2, 2) = r;
  b(1, 3) = r;  // psi-
  b(2, 3) = -r;
  return b;
}

CMat BellDiagonalState::matrix() const {
  const CMat b = bell_basis();
  CMat out = CMat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) out += lambdas[i] * b.col(i) * b.col(i).adjoint();
  return out;
}

CMat twirl(const CMat& rho) {
  require_two_qubits(rho);
  CMat out = CMat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const CMat u = kron(pauli::sigma(i), pauli::sigma(i));
    out += u * rho * u.adjoint();
  }
  return 0.25 * out;
}

DensityOperator twirl(const DensityOperator& rho) { return DensityOperator(herm(twirl(rho.matrix()))); }

HermitianOperator twirl_adjoint(const HermitianOperator& gamma) {
  require_two_qubits(gamma.matrix());
  CMat out = CMat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const CMat u = kron(pauli::sigma(i), pauli::sigma(i));
    out += u.adjoint() * gamma.matrix() * u;
  }
  return HermitianOperator::hermitian_part(0.25 * out);
}

BellDiagonalState bell_weights(const CMat& rho) {
  require_two_qubits(rho);
  const CMat b = bell_basis();
  const CMat d = b.adjoint() * rho * b;
  BellDiagonalState s;
  for (int i = 0; i < 4; ++i) s.lambdas[i] = d(i, i).real();
  return s;
}

bool statistics_symmetric(const StatisticsTable& table, Graining graining, double tol) {
  if (table.protocol != Protocol::qubit) throw std::invalid_argument("statistics_symmetric: qubit table required");
  if (graining == Graining::coarse) return true;
  const Eigen::MatrixXd& g = table.blocks.at(0);
  enum { H = 0, V = 1, P = 2, M = 3 };
  auto eq = [&](double a, double b) { return std::abs(a - b) <= tol; };
  bool ok = eq(g(H, H), g(V, V)) && eq(g(H, V), g(V, H)) && eq(g(P, P), g(M, M)) && eq(g(P, M), g(M, P));
  if (graining == Graining::fine) {
    ok = ok && eq(g(H, P), g(H, M)) && eq(g(H, P), g(V, P)) && eq(g(H, P), g(V, M));
    ok = ok && eq(g(P, H), g(P, V)) && eq(g(P, H), g(M, H)) && eq(g(P, H), g(M, V));
  }
  return ok;
}

double bell_objective(const BellDiagonalState& s) {
  s.validate();
  const double hl = shannon(s.lambdas);
  return 0.25 * ((1.0 - hl + binary_entropy(s.qber_z())) + (1.0 - hl + binary_entropy(s.qber_x())));
}

BellMinimum bell_minimize(double e_z, double e_x) {
  if (e_z < 0.0 || e_z > 1.0 || e_x < 0.0 || e_x > 1.0) {
    throw std::invalid_argument("bell_minimize: error rates must lie in [0, 1]");
  }
  const double lo = std::max(0.0, e_z + e_x - 1.0);
  const double hi = std::min(e_z, e_x);
  if (lo > hi + 1e-15) throw std::invalid_argument("bell_minimize: no Bell-diagonal state has these error rates");
  auto state = [&](double t) {
    BellDiagonalState s;
    s.lambdas = {std::max(0.0, 1.0 - e_z - e_x + t), std::max(0.0, e_x - t), std::max(0.0, e_z - t),
                 std::max(0.0, t)};
    return s;
  };
  auto value = [&](double t) { return bell_objective(state(t)); };
  constexpr double kStep = 1e-3;
  double best_t = lo;
  double best = value(lo);
  for (double t = lo + kStep; t < hi; t += kStep) {
    const double v = value(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  if (value(hi) < best) {
    best = value(hi);
    best_t = hi;
  }
  // The objective is convex in lambda_3, so the bracket around the best grid
  // point contains the minimum.
  double a = std::max(lo, best_t - kStep);
  double b = std::min(hi, best_t + kStep);
  while (b - a > 1e-6) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (value(m1) < value(m2)) {
      b = m2;
    } else {
      a = m1;
    }
  }
  const double t = 0.5 * (a + b);
  BellMinimum r;
  r.value = std::min(best, value(t));
  r.argmin = r.value == best ? state(best_t) : state(t);
  return r;
}

double eve_block_diagonality(const BellDiagonalState& s, MeasureBasis basis) {
  s.validate();
  const CMat b = bell_basis();
  // |Psi> on A (x) B (x) E, E of dimension 4.
  CVec psi = CVec::Zero(16);
  for (int i = 0; i < 4; ++i) {
    const double w = std::sqrt(std::max(0.0, s.lambdas[i]));
    psi += w * kron(CMat(b.col(i)), CMat(ket(4, i)));
  }
  CMat u;  // columns are the basis states
  const double r = 1.0 / std::sqrt(2.0);
  switch (basis) {
    case MeasureBasis::z:
      u = CMat::Identity(2, 2);
      break;
    case MeasureBasis::x:
      u.resize(2, 2);
      u << r, r, r, -r;
      break;
    case MeasureBasis::y:
      u.resize(2, 2);
      u << r, r, cdouble(0, r), cdouble(0, -r);
      break;
  }
  std::array<CMat, 4> eve;  // index 2x + y
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      // <x|_A <y|_B |Psi> as a vector on E.
      const CMat bra = kron(CMat(u.col(x).adjoint()), CMat(u.col(y).adjoint()));
      CVec v = CVec::Zero(4);
      for (int e = 0; e < 4; ++e) {
        for (int ab = 0; ab < 4; ++ab) v(e) += bra(0, ab) * psi(ab * 4 + e);
      }
      eve[2 * x + y] = v * v.adjoint();
    }
  }
  const CMat s_same = support(eve[0] + eve[3]);
  const CMat s_diff = support(eve[1] + eve[2]);
  if (s_same.cols() == 0 || s_diff.cols() == 0) return 0.0;
  const CMat gram = s_same.adjoint() * s_diff;
  Eigen::JacobiSVD<CMat> svd(gram);
  return svd.singularValues()(0);
}

bool twirl_decreases_objective(const DensityOperator& rho, const ProtocolMaps& maps) {
  if (maps.protocol != Protocol::qubit) throw std::invalid_argument("twirl_decreases_objective: qubit maps required");
  const double before = objective(rho.matrix(), maps);
  const double after = objective(twirl(rho.matrix()), maps);
  return after <= before + 1e-9;
}

CMat random_hermitian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd;
  CMat g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = cdouble(nd(rng), nd(rng));
  }
  return herm(g);
}

CMat random_density(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd;
  CMat g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = cdouble(nd(rng), nd(rng));
  }
  CMat r = g * g.adjoint();
  return herm(r / r.trace().real());
}

CMat random_source_state(std::mt19937_64& rng, int bob_dim) {
  const CMat rho = random_density(rng, 2 * bob_dim);
  const std::array<int, 2> dims{2, bob_dim};
  const std::array<int, 1> keep{0};
  const CMat rho_a = partial_trace(rho, dims, keep);
  const Spectrum s = eigh(2.0 * rho_a);
  RVec inv_sqrt = s.values.cwiseSqrt().cwiseInverse();
  const CMat m = s.vectors * inv_sqrt.asDiagonal() * s.vectors.adjoint();
  const CMat big = kron(m, CMat::Identity(bob_dim, bob_dim));
  return herm(big * rho * big.adjoint());
}

}  // namespace cascadeqkd
