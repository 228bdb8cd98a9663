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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cascadeqkd {

HermitianOperator::HermitianOperator(CMat entries, double tol) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw DimensionError("HermitianOperator requires a non-empty square matrix");
  }
  const double defect = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (defect > tol) {
    throw NotHermitianError("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  }
}

HermitianOperator HermitianOperator::hermitian_part(const CMat& m) {
  HermitianOperator h;
  h.entries_ = 0.5 * (m + m.adjoint());
  return h;
}

DensityOperator::DensityOperator(HermitianOperator op) : op_(std::move(op)) {
  trace_ = op_.matrix().trace().real();
  const double lo = min_eigenvalue(op_.matrix());
  if (lo < -1e-10) {
    throw std::invalid_argument("density operator has negative eigenvalue " + std::to_string(lo));
  }
  if (!(trace_ > 0.0) || trace_ > 1.0 + 1e-10) {
    throw std::invalid_argument("density operator trace out of (0, 1]: " + std::to_string(trace_));
  }
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMat kron(std::initializer_list<CMat> factors) {
  CMat out = CMat::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(kron(a.matrix(), b.matrix()));
}

KrausOperator tensor(const KrausOperator& a, const KrausOperator& b) {
  return KrausOperator(kron(a.matrix(), b.matrix()));
}

CMat partial_trace(const CMat& x, std::span<const int> dims, std::span<const int> keep) {
  const int n = static_cast<int>(dims.size());
  const long total = std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<>());
  if (x.rows() != total || x.cols() != total) {
    throw DimensionError("partial_trace: register dimensions do not match operator size");
  }
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw DimensionError("partial_trace: keep index out of range");
    kept[k] = true;
  }
  long out_dim = 1;
  for (int r = 0; r < n; ++r) {
    if (kept[r]) out_dim *= dims[r];
  }

  // Split a flat index into (kept index, traced index).
  auto split = [&](long idx, long& kidx, long& tidx) {
    kidx = 0;
    tidx = 0;
    long kmul = 1;
    long tmul = 1;
    for (int r = n - 1; r >= 0; --r) {
      const long digit = idx % dims[r];
      idx /= dims[r];
      if (kept[r]) {
        kidx += digit * kmul;
        kmul *= dims[r];
      } else {
        tidx += digit * tmul;
        tmul *= dims[r];
      }
    }
  };

  std::vector<long> kidx(total), tidx(total);
  for (long i = 0; i < total; ++i) split(i, kidx[i], tidx[i]);

  CMat out = CMat::Zero(out_dim, out_dim);
  for (long i = 0; i < total; ++i) {
    for (long j = 0; j < total; ++j) {
      if (tidx[i] == tidx[j]) out(kidx[i], kidx[j]) += x(i, j);
    }
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& x, std::span<const int> dims,
                              std::span<const int> keep) {
  return DensityOperator(HermitianOperator::hermitian_part(partial_trace(x.matrix(), dims, keep)));
}

Spectrum eigh(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (x + x.adjoint()));
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (x + x.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (x + x.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

bool is_psd(const CMat& x, double tol) { return min_eigenvalue(x) >= -tol; }

namespace {

template <typename F>
CMat spectral_apply(const CMat& x, F&& fn) {
  const Spectrum s = eigh(x);
  RVec v = s.values.unaryExpr(fn);
  return s.vectors * v.asDiagonal() * s.vectors.adjoint();
}

}  // namespace

CMat matrix_log2(const CMat& x, double clip) {
  if (!(clip > 0.0)) throw std::invalid_argument("matrix_log2: clip must be positive");
  return spectral_apply(x, [clip](double v) { return std::log2(std::max(v, clip)); });
}

HermitianOperator matrix_log2(const HermitianOperator& x, double clip) {
  return HermitianOperator::hermitian_part(matrix_log2(x.matrix(), clip));
}

CMat matrix_exp2(const CMat& x) {
  return spectral_apply(x, [](double v) { return std::exp2(v); });
}

CMat matrix_sqrt_psd(const CMat& x) {
  // Round-off eigenvalues of a singular input would otherwise turn into
  // O(1e-8) entries after the square root.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * x.cwiseAbs().maxCoeff();
  return spectral_apply(x, [floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
}

double entropy2(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (x + x.adjoint()), Eigen::EigenvaluesOnly);
  double h = 0.0;
  for (double v : es.eigenvalues()) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

RelEntropyResult rel_entropy2(const DensityOperator& x, const DensityOperator& y, double clip,
                              double support_tol) {
  if (x.dim() != y.dim()) throw DimensionError("rel_entropy2: dimension mismatch");
  const Spectrum sy = eigh(y.matrix());
  RelEntropyResult r;
  RVec logy(sy.values.size());
  CMat xy = sy.vectors.adjoint() * x.matrix() * sy.vectors;
  for (Eigen::Index i = 0; i < sy.values.size(); ++i) {
    if (sy.values(i) < clip) r.support_defect += std::max(0.0, xy(i, i).real());
    logy(i) = std::log2(std::max(sy.values(i), clip));
  }
  double cross = 0.0;
  for (Eigen::Index i = 0; i < logy.size(); ++i) cross += xy(i, i).real() * logy(i);
  r.bits = -entropy2(x.matrix()) - cross;
  r.support_ok = r.support_defect <= support_tol;
  return r;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double hs_inner(const CMat& a, const CMat& b) { return (a.adjoint() * b).trace().real(); }

double max_abs_diff(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

namespace pauli {
CMat identity(int d) { return CMat::Identity(d, d); }
CMat x() {
  CMat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
CMat y() {
  CMat m(2, 2);
  m << 0, cdouble(0, -1), cdouble(0, 1), 0;
  return m;
}
CMat z() {
  CMat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
CMat sigma(int i) {
  switch (i) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw std::out_of_range("pauli::sigma index must be 0..3");
  }
}
}  // namespace pauli

CMat ket(int dim, int index) {
  CMat v = CMat::Zero(dim, 1);
  v(index, 0) = 1.0;
  return v;
}

CMat projector(const CMat& v) { return v * v.adjoint(); }

RVec to_real_vec(const CMat& h) {
  const int d = static_cast<int>(h.rows());
  RVec v(d * d);
  int k = 0;
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < d; ++i) v(k++) = h(i, i).real();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      v(k++) = r2 * h(i, j).real();
      v(k++) = r2 * h(i, j).imag();
    }
  }
  return v;
}

CMat from_real_vec(const RVec& v, int d) {
  if (v.size() != d * d) throw DimensionError("from_real_vec: length is not d^2");
  CMat h = CMat::Zero(d, d);
  int k = 0;
  const double r2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) h(i, i) = v(k++);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double re = v(k++) * r2;
      const double im = v(k++) * r2;
      h(i, j) = cdouble(re, im);
      h(j, i) = cdouble(re, -im);
    }
  }
  return h;
}

}  // namespace cascadeqkd
