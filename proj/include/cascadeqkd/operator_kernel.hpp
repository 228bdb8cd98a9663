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

// Dense complex linear algebra shared by every other module.
//
// Register convention: all composite spaces are Kronecker products with the
// first factor most significant (row-major), and multi-register operators are
// always laid out in the order Z, A, B, A~ (announcement), W.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascadeqkd {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Default eigenvalue floor applied before taking logarithms.
inline constexpr double kDefaultClip = 1e-12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotHermitianError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A square complex matrix equal to its conjugate transpose (to 1e-12).
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(CMat entries, double tol = 1e-12);

  /// Hermitian part of `m`, without a tolerance check.
  static HermitianOperator hermitian_part(const CMat& m);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const CMat& matrix() const { return entries_; }

 private:
  CMat entries_;
};

/// Positive semidefinite operator with trace in (0, 1]; unnormalized
/// conditional states are allowed.
class DensityOperator {
 public:
  DensityOperator() = default;
  explicit DensityOperator(HermitianOperator op);
  explicit DensityOperator(CMat entries) : DensityOperator(HermitianOperator(std::move(entries))) {}

  int dim() const { return op_.dim(); }
  const CMat& matrix() const { return op_.matrix(); }
  const HermitianOperator& op() const { return op_; }
  double trace() const { return trace_; }

 private:
  HermitianOperator op_;
  double trace_ = 0.0;
};

/// Rectangular operator out_dim x in_dim.
class KrausOperator {
 public:
  KrausOperator() = default;
  explicit KrausOperator(CMat entries) : entries_(std::move(entries)) {}

  int out_dim() const { return static_cast<int>(entries_.rows()); }
  int in_dim() const { return static_cast<int>(entries_.cols()); }
  const CMat& matrix() const { return entries_; }

 private:
  CMat entries_;
};

// --- tensor products -------------------------------------------------------

CMat kron(const CMat& a, const CMat& b);
CMat kron(std::initializer_list<CMat> factors);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
KrausOperator tensor(const KrausOperator& a, const KrausOperator& b);

// --- partial trace ---------------------------------------------------------

/// Traces out every register not listed in `keep`. Kept registers retain
/// their relative order.
CMat partial_trace(const CMat& x, std::span<const int> dims, std::span<const int> keep);
DensityOperator partial_trace(const DensityOperator& x, std::span<const int> dims,
                              std::span<const int> keep);

// --- spectral functions ----------------------------------------------------

struct Spectrum {
  RVec values;   // ascending
  CMat vectors;  // columns
};

Spectrum eigh(const CMat& x);
double min_eigenvalue(const CMat& x);
double max_eigenvalue(const CMat& x);
bool is_psd(const CMat& x, double tol = 1e-10);

/// Base-2 logarithm with eigenvalues below `clip` raised to `clip`.
HermitianOperator matrix_log2(const HermitianOperator& x, double clip = kDefaultClip);
CMat matrix_log2(const CMat& x, double clip = kDefaultClip);
CMat matrix_exp2(const CMat& x);
CMat matrix_sqrt_psd(const CMat& x);

/// -Tr(x log2 x) with eigenvalues <= 0 contributing nothing. Works for
/// unnormalized x.
double entropy2(const CMat& x);

struct RelEntropyResult {
  double bits = 0.0;
  /// Weight of x outside the support of y (eigenvalues of y below the clip).
  double support_defect = 0.0;
  bool support_ok = true;
};

/// Tr(x log2 x) - Tr(x log2 y). The part of x lying on eigenvectors of y
/// below `clip` is reported as `support_defect`.
RelEntropyResult rel_entropy2(const DensityOperator& x, const DensityOperator& y,
                              double clip = kDefaultClip, double support_tol = 1e-9);

// --- small helpers ---------------------------------------------------------

double binary_entropy(double p);
double hs_inner(const CMat& a, const CMat& b);  // Re Tr(a^dagger b)
double max_abs_diff(const CMat& a, const CMat& b);

namespace pauli {
CMat identity(int d = 2);
CMat x();
CMat y();
CMat z();
/// sigma_i for i in {0,1,2,3} = I, X, Y, Z.
CMat sigma(int i);
}  // namespace pauli

CMat ket(int dim, int index);
CMat projector(const CMat& v);

/// Real orthonormal coordinates of a Hermitian d x d matrix (length d^2), such
/// that Tr(a b) = to_real_vec(a) . to_real_vec(b).
RVec to_real_vec(const CMat& h);
CMat from_real_vec(const RVec& v, int d);

}  // namespace cascadeqkd
