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

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cascadeqkd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMat herm(const CMat& m) { return 0.5 * (m + m.adjoint()); }

double tr_re(const CMat& a, const CMat& b) { return (a.transpose().cwiseProduct(b)).sum().real(); }

// Standard-form block problem: min Tr(C X) + cs.s, Tr(A_i X) + a_i.s = b_i,
// X >= 0, s >= 0.
struct Core {
  int n = 0;
  CMat c;
  std::vector<CMat> a_mat;
  RMat a_vec;  // rows x p
  RVec c_vec;
  RVec b;
};

struct CoreSolution {
  CMat x, z;
  RVec s, w, y;  // w: scalar dual slacks
  bool converged = false;
  int iterations = 0;
  double primal = 0.0;
  double merit = kInf;
};

double max_step_psd(const CMat& x, const CMat& d) {
  Eigen::LLT<CMat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const CMat li = llt.matrixL().solve(CMat::Identity(x.rows(), x.cols()));
  const double lmin = min_eigenvalue(herm(li * d * li.adjoint()));
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double max_step_vec(const RVec& v, const RVec& d) {
  double a = kInf;
  for (int i = 0; i < v.size(); ++i) {
    if (d(i) < 0.0) a = std::min(a, -v(i) / d(i));
  }
  return a;
}

CoreSolution solve_core(const Core& p, const SdpOptions& opts) {
  const int n = p.n;
  const int m = static_cast<int>(p.b.size());
  const int np = static_cast<int>(p.c_vec.size());
  const CMat eye = CMat::Identity(n, n);

  CoreSolution st;
  st.x = eye;
  st.z = eye;
  st.s = RVec::Ones(np);
  st.w = RVec::Ones(np);
  st.y = RVec::Zero(m);

  const double bnorm = 1.0 + p.b.norm();
  const double cnorm = 1.0 + p.c.norm() + p.c_vec.norm();

  // Iterates can lose accuracy once the residuals reach rounding level, so
  // the best iterate by the largest scaled residual is kept and returned.
  CoreSolution best = st;
  int since_best = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    st.iterations = it;
    RVec rp = p.b;
    CMat rd = p.c - st.z;
    RVec rdv = p.c_vec - st.w;
    for (int i = 0; i < m; ++i) {
      rp(i) -= tr_re(p.a_mat[i], st.x) + (np ? p.a_vec.row(i).dot(st.s) : 0.0);
      rd -= st.y(i) * p.a_mat[i];
      if (np) rdv -= st.y(i) * p.a_vec.row(i).transpose();
    }
    const double pobj = tr_re(p.c, st.x) + p.c_vec.dot(st.s);
    const double dobj = p.b.dot(st.y);
    const double comp = tr_re(st.x, st.z) + st.s.dot(st.w);
    const double mu = comp / (n + np);
    st.primal = pobj;
    const double pinf = rp.norm() / bnorm;
    const double dinf = (rd.norm() + rdv.norm()) / cnorm;
    const double relgap = std::abs(comp) / (1.0 + std::abs(pobj) + std::abs(dobj));
    st.merit = std::max({pinf, dinf, relgap});
    if (!std::isfinite(st.merit) || st.y.norm() > 1e14) break;
    since_best = st.merit < 0.9 * best.merit ? 0 : since_best + 1;
    if (st.merit < best.merit) best = st;
    if (st.merit < opts.tol) break;
    if (since_best >= 20) break;

    Eigen::LLT<CMat> zllt(st.z);
    if (zllt.info() != Eigen::Success) break;
    const CMat zinv = herm(zllt.solve(eye));
    const RVec winv = st.w.cwiseInverse();

    std::vector<CMat> xaz(m);
    for (int j = 0; j < m; ++j) xaz[j] = st.x * p.a_mat[j] * zinv;
    RMat mm(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        double v = tr_re(p.a_mat[i], xaz[j]);
        for (int k = 0; k < np; ++k) v += p.a_vec(i, k) * p.a_vec(j, k) * st.s(k) * winv(k);
        mm(i, j) = v;
        mm(j, i) = v;
      }
    }
    // Near the optimum the Schur complement can lose definiteness to
    // rounding; a rank-revealing solve takes over then.
    Eigen::LDLT<RMat> mldlt(mm);
    Eigen::CompleteOrthogonalDecomposition<RMat> mcod;
    const bool schur_ok = mldlt.info() == Eigen::Success && mldlt.isPositive();
    if (!schur_ok) mcod.compute(mm);

    struct Dir {
      CMat dx, dz;
      RVec ds, dw, dy;
    };
    const CMat xrdz = herm(st.x * rd * zinv);
    auto direction = [&](double target, const CMat& corr, const RVec& corr_s) {
      const CMat base = herm((target * eye - corr) * zinv) - st.x - xrdz;
      const RVec base_s =
          (RVec::Constant(np, target) - corr_s).cwiseProduct(winv) - st.s - st.s.cwiseProduct(rdv).cwiseProduct(winv);
      RVec rhs(m);
      for (int i = 0; i < m; ++i) {
        rhs(i) = rp(i) - tr_re(p.a_mat[i], base) - (np ? p.a_vec.row(i).dot(base_s) : 0.0);
      }
      Dir d;
      d.dy = schur_ok ? RVec(mldlt.solve(rhs)) : RVec(mcod.solve(rhs));
      d.dz = rd;
      d.dw = rdv;
      for (int i = 0; i < m; ++i) {
        d.dz -= d.dy(i) * p.a_mat[i];
        if (np) d.dw -= d.dy(i) * p.a_vec.row(i).transpose();
      }
      d.dz = herm(d.dz);
      d.dx = base + xrdz - herm(st.x * d.dz * zinv);
      d.ds = base_s + st.s.cwiseProduct(rdv).cwiseProduct(winv) - st.s.cwiseProduct(d.dw).cwiseProduct(winv);
      return d;
    };
    auto steps = [&](const Dir& d) {
      double ap = std::min(max_step_psd(st.x, d.dx), max_step_vec(st.s, d.ds));
      double ad = std::min(max_step_psd(st.z, d.dz), max_step_vec(st.w, d.dw));
      return std::pair<double, double>{std::min(1.0, ap), std::min(1.0, ad)};
    };

    const Dir pred = direction(0.0, CMat::Zero(n, n), RVec::Zero(np));
    const auto [ap_a, ad_a] = steps(pred);
    const double mu_a = (tr_re(st.x + ap_a * pred.dx, st.z + ad_a * pred.dz) +
                         (st.s + ap_a * pred.ds).dot(st.w + ad_a * pred.dw)) /
                        (n + np);
    const double sigma = std::clamp(std::pow(std::max(mu_a, 0.0) / mu, 3.0), 0.0, 1.0);
    const Dir d = direction(sigma * mu, pred.dx * pred.dz, pred.ds.cwiseProduct(pred.dw));
    auto [ap, ad] = steps(d);
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);
    st.x = herm(st.x + ap * d.dx);
    st.s += ap * d.ds;
    st.z = herm(st.z + ad * d.dz);
    st.w += ad * d.dw;
    st.y += ad * d.dy;
  }
  best.converged = best.merit < std::max(opts.tol, opts.accept_tol);
  return best;
}

// Equality rows reduced to an orthonormal set; interval rows scaled to unit
// Frobenius norm; intervals of zero width become equalities. The source
// fields map reduced rows back onto the constraints of the input problem.
struct Reduced {
  int n = 0;
  std::vector<CMat> eq;
  RVec eq_rhs;
  std::vector<CMat> iv;
  RVec low, high;
  std::vector<int> eq_src;  // i >= 0: equality i; i < 0: interval -1 - i
  RMat eq_coef;             // eq[k] = sum_i eq_coef(i, k) * row eq_src[i]
  std::vector<int> iv_src;
  std::vector<double> iv_scale;
  bool consistent = true;
  std::string message;
};

Reduced reduce(const SdpProblem& p) {
  Reduced r;
  r.n = p.dim();
  const int n = r.n;
  if (p.eq_ops.size() != p.eq_rhs.size() || p.iv_ops.size() != p.iv_low.size() ||
      p.iv_ops.size() != p.iv_high.size()) {
    throw std::invalid_argument("SdpProblem: operator and bound counts differ");
  }
  std::vector<CMat> eq = p.eq_ops;
  std::vector<double> eq_rhs = p.eq_rhs;
  for (std::size_t i = 0; i < eq.size(); ++i) r.eq_src.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < p.iv_ops.size(); ++j) {
    const double lo = p.iv_low[j], hi = p.iv_high[j];
    if (lo > hi + 1e-12) {
      r.consistent = false;
      r.message = "interval constraint with lower bound above upper bound";
      return r;
    }
    const double scale = p.iv_ops[j].norm();
    if (scale == 0.0) {
      if (lo > 1e-12 || hi < -1e-12) {
        r.consistent = false;
        r.message = "zero operator with interval excluding 0";
        return r;
      }
      continue;
    }
    if (hi - lo <= 1e-12) {
      eq.push_back(p.iv_ops[j]);
      eq_rhs.push_back(0.5 * (lo + hi));
      r.eq_src.push_back(-1 - static_cast<int>(j));
      continue;
    }
    r.iv.push_back(p.iv_ops[j] / scale);
    r.iv_src.push_back(static_cast<int>(j));
    r.iv_scale.push_back(scale);
    r.low.conservativeResize(r.low.size() + 1);
    r.high.conservativeResize(r.high.size() + 1);
    r.low(r.low.size() - 1) = lo / scale;
    r.high(r.high.size() - 1) = hi / scale;
  }
  if (eq.empty()) {
    r.eq_rhs = RVec(0);
    return r;
  }
  RMat e(eq.size(), n * n);
  RVec b(eq.size());
  for (std::size_t i = 0; i < eq.size(); ++i) {
    e.row(i) = to_real_vec(eq[i]).transpose();
    b(i) = eq_rhs[i];
  }
  Eigen::JacobiSVD<RMat> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-10 * std::max(1.0, smax)) ++rank;
  const RMat ur = svd.matrixU().leftCols(rank);
  const RVec proj = ur * (ur.transpose() * b);
  if ((b - proj).norm() > 1e-9 * (1.0 + b.norm())) {
    r.consistent = false;
    r.message = "equality constraints are inconsistent";
    return r;
  }
  r.eq_rhs.resize(rank);
  r.eq_coef = ur * sv.head(rank).cwiseInverse().asDiagonal();
  for (int k = 0; k < rank; ++k) {
    r.eq.push_back(herm(from_real_vec(svd.matrixV().col(k), n)));
    r.eq_rhs(k) = ur.col(k).dot(b) / sv(k);
  }
  return r;
}

Core make_core(const Reduced& r, const CMat& cost, int extra_scalars) {
  const int n_eq = static_cast<int>(r.eq.size());
  const int n_iv = static_cast<int>(r.iv.size());
  Core c;
  c.n = r.n;
  c.c = cost;
  const int np = 2 * n_iv + extra_scalars;
  c.a_vec = RMat::Zero(n_eq + 2 * n_iv, np);
  c.c_vec = RVec::Zero(np);
  c.b.resize(n_eq + 2 * n_iv);
  for (int i = 0; i < n_eq; ++i) {
    c.a_mat.push_back(r.eq[i]);
    c.b(i) = r.eq_rhs(i);
  }
  for (int j = 0; j < n_iv; ++j) {
    c.a_mat.push_back(r.iv[j]);
    c.a_vec(n_eq + 2 * j, 2 * j) = -1.0;
    c.b(n_eq + 2 * j) = r.low(j);
    c.a_mat.push_back(r.iv[j]);
    c.a_vec(n_eq + 2 * j + 1, 2 * j + 1) = 1.0;
    c.b(n_eq + 2 * j + 1) = r.high(j);
  }
  return c;
}

CMat project_equalities(const Reduced& r, CMat x) {
  for (std::size_t k = 0; k < r.eq.size(); ++k) {
    x -= (tr_re(r.eq[k], x) - r.eq_rhs(k)) * r.eq[k];
  }
  return herm(x);
}

}  // namespace

double constraint_residual(const SdpProblem& p, const CMat& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.eq_ops.size(); ++i) {
    worst = std::max(worst, std::abs(tr_re(p.eq_ops[i], x) - p.eq_rhs[i]));
  }
  for (std::size_t j = 0; j < p.iv_ops.size(); ++j) {
    const double v = tr_re(p.iv_ops[j], x);
    worst = std::max({worst, p.iv_low[j] - v, v - p.iv_high[j]});
  }
  return worst;
}

namespace {

// Multipliers attached to the constraints of an input problem.
struct Multipliers {
  RVec eq, iv;
};

Multipliers map_multipliers(const SdpProblem& p, const Reduced& r, const RVec& y) {
  Multipliers w{RVec::Zero(static_cast<int>(p.eq_ops.size())), RVec::Zero(static_cast<int>(p.iv_ops.size()))};
  const int n_eq = static_cast<int>(r.eq.size());
  if (n_eq > 0) {
    const RVec ys = r.eq_coef * y.head(n_eq);
    for (std::size_t i = 0; i < r.eq_src.size(); ++i) {
      const int src = r.eq_src[i];
      if (src >= 0) {
        w.eq(src) += ys(static_cast<int>(i));
      } else {
        w.iv(-1 - src) += ys(static_cast<int>(i));
      }
    }
  }
  for (std::size_t k = 0; k < r.iv.size(); ++k) {
    const int row = n_eq + 2 * static_cast<int>(k);
    w.iv(r.iv_src[k]) += (std::max(0.0, y(row)) + std::min(0.0, y(row + 1))) / r.iv_scale[k];
  }
  return w;
}

// Weak-duality bound sum w b + sum w (L or U) + lambda_min(C - sum w A),
// valid for every choice of multipliers because Tr X = 1 is implied.
double dual_bound(const SdpProblem& p, const CMat& cost, const Multipliers& w) {
  CMat z = cost;
  double bound = 0.0;
  for (std::size_t i = 0; i < p.eq_ops.size(); ++i) {
    z -= w.eq(i) * p.eq_ops[i];
    bound += w.eq(i) * p.eq_rhs[i];
  }
  for (std::size_t j = 0; j < p.iv_ops.size(); ++j) {
    z -= w.iv(j) * p.iv_ops[j];
    bound += w.iv(j) * (w.iv(j) >= 0.0 ? p.iv_low[j] : p.iv_high[j]);
  }
  // Eigenvalues carry an absolute error of order eps * |Z|.
  const double rounding = 10.0 * p.dim() * std::numeric_limits<double>::epsilon() * z.norm();
  return bound + min_eigenvalue(herm(z)) - rounding;
}

// Semidefinite constraints pinned at zero force X onto the kernel of their
// sum. Solving on that face restores a strictly feasible interior.
struct Face {
  CMat v;  // orthonormal basis of the face, n x m
  std::vector<int> null_eq, null_iv;
  std::vector<double> eq_sign;
};

Face find_face(const SdpProblem& p) {
  constexpr double kZero = 1e-12;
  const int n = p.dim();
  Face f;
  CMat gamma = CMat::Zero(n, n);
  for (std::size_t i = 0; i < p.eq_ops.size(); ++i) {
    const CMat op = herm(p.eq_ops[i]);
    const double nrm = op.norm();
    if (nrm == 0.0 || std::abs(p.eq_rhs[i]) > kZero * nrm) continue;
    double sign = 0.0;
    if (min_eigenvalue(op) >= -kZero * nrm) sign = 1.0;
    else if (max_eigenvalue(op) <= kZero * nrm) sign = -1.0;
    if (sign == 0.0) continue;
    gamma += (sign / nrm) * op;
    f.null_eq.push_back(static_cast<int>(i));
    f.eq_sign.push_back(sign);
  }
  for (std::size_t j = 0; j < p.iv_ops.size(); ++j) {
    const CMat op = herm(p.iv_ops[j]);
    const double nrm = op.norm();
    if (nrm == 0.0 || p.iv_high[j] > kZero * nrm || min_eigenvalue(op) < -kZero * nrm) continue;
    gamma += op / nrm;
    f.null_iv.push_back(static_cast<int>(j));
  }
  if (f.null_eq.empty() && f.null_iv.empty()) {
    f.v = CMat::Identity(n, n);
    return f;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(herm(gamma));
  const double top = es.eigenvalues().maxCoeff();
  int m = 0;
  while (m < n && es.eigenvalues()(m) <= 1e-9 * top) ++m;
  f.v = es.eigenvectors().leftCols(m);
  return f;
}

struct Compressed {
  SdpProblem q;
  std::vector<int> eq_map, iv_map;  // q row -> p row
};

Compressed compress(const SdpProblem& p, const Face& f) {
  Compressed c;
  const CMat& v = f.v;
  c.q.cost = herm(v.adjoint() * p.cost * v);
  for (std::size_t i = 0; i < p.eq_ops.size(); ++i) {
    if (std::find(f.null_eq.begin(), f.null_eq.end(), static_cast<int>(i)) != f.null_eq.end()) continue;
    c.q.eq_ops.push_back(herm(v.adjoint() * p.eq_ops[i] * v));
    c.q.eq_rhs.push_back(p.eq_rhs[i]);
    c.eq_map.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < p.iv_ops.size(); ++j) {
    if (std::find(f.null_iv.begin(), f.null_iv.end(), static_cast<int>(j)) != f.null_iv.end()) continue;
    c.q.iv_ops.push_back(herm(v.adjoint() * p.iv_ops[j] * v));
    c.q.iv_low.push_back(p.iv_low[j]);
    c.q.iv_high.push_back(p.iv_high[j]);
    c.iv_map.push_back(static_cast<int>(j));
  }
  return c;
}

Multipliers expand(const SdpProblem& p, const Compressed& c, const Multipliers& wq) {
  Multipliers w{RVec::Zero(static_cast<int>(p.eq_ops.size())), RVec::Zero(static_cast<int>(p.iv_ops.size()))};
  for (std::size_t i = 0; i < c.eq_map.size(); ++i) w.eq(c.eq_map[i]) = wq.eq(i);
  for (std::size_t j = 0; j < c.iv_map.size(); ++j) w.iv(c.iv_map[j]) = wq.iv(j);
  return w;
}

// Best bound over a penalty t on the pinned constraints; t = 0 is included.
double face_bound(const SdpProblem& p, const CMat& cost, const Face& f, const Multipliers& w) {
  double best = dual_bound(p, cost, w);
  if (f.null_eq.empty() && f.null_iv.empty()) return best;
  for (double t = 1e-3; t <= 1e9; t *= 10.0) {
    Multipliers wt = w;
    for (std::size_t k = 0; k < f.null_eq.size(); ++k) {
      const int i = f.null_eq[k];
      wt.eq(i) -= t * f.eq_sign[k] / p.eq_ops[i].norm();
    }
    for (const int j : f.null_iv) wt.iv(j) -= t / p.iv_ops[j].norm();
    best = std::max(best, dual_bound(p, cost, wt));
  }
  return best;
}

struct PlainSolve {
  bool consistent = false;
  std::string message;
  CoreSolution sol;
  CMat x;
  Multipliers w;
};

PlainSolve solve_plain(const SdpProblem& p, const SdpOptions& opts) {
  PlainSolve out;
  const Reduced r = reduce(p);
  out.consistent = r.consistent;
  out.message = r.message;
  if (!r.consistent) return out;
  out.sol = solve_core(make_core(r, herm(p.cost), 0), opts);
  out.x = project_equalities(r, out.sol.x);
  out.w = map_multipliers(p, r, out.sol.y);
  return out;
}

struct PlainInterior {
  bool consistent = false;
  std::string message;
  bool converged = false;
  CMat x;
};

PlainInterior interior_plain(const SdpProblem& p, const SdpOptions& opts) {
  PlainInterior out;
  const Reduced r = reduce(p);
  out.consistent = r.consistent;
  out.message = r.message;
  if (!r.consistent) return out;
  const int n = r.n;
  // X = P + (t+ - t-) I with P >= 0; maximize t.
  Core core = make_core(r, CMat::Zero(n, n), 2);
  const int np = static_cast<int>(core.c_vec.size());
  const int tp = np - 2, tm = np - 1;
  constexpr double kSplitPenalty = 1e-6;
  core.c_vec(tp) = -1.0 + kSplitPenalty;
  core.c_vec(tm) = 1.0 + kSplitPenalty;
  for (std::size_t i = 0; i < core.a_mat.size(); ++i) {
    const double tr = core.a_mat[i].trace().real();
    core.a_vec(i, tp) = tr;
    core.a_vec(i, tm) = -tr;
  }
  const CoreSolution sol = solve_core(core, opts);
  const double t = sol.s(tp) - sol.s(tm);
  out.x = project_equalities(r, sol.x + t * CMat::Identity(n, n));
  out.converged = sol.converged;
  return out;
}

bool proper_face(const Face& f, int n) { return f.v.cols() > 0 && f.v.cols() < n; }

}  // namespace

SdpResult solve_linear_sdp(const SdpProblem& p, const SdpOptions& opts) {
  SdpResult out;
  const CMat cost = herm(p.cost);
  const Face face = find_face(p);
  PlainSolve ps;
  bool solved = false;
  if (proper_face(face, p.dim())) {
    const Compressed c = compress(p, face);
    ps = solve_plain(c.q, opts);
    if (ps.consistent) {
      ps.x = herm(face.v * ps.x * face.v.adjoint());
      ps.w = expand(p, c, ps.w);
      solved = true;
    }
  }
  if (!solved) ps = solve_plain(p, opts);
  if (!ps.consistent) {
    out.status = SdpStatus::infeasible;
    out.message = ps.message;
    return out;
  }
  out.iterations = ps.sol.iterations;
  out.x = ps.x;
  out.primal = tr_re(cost, out.x);
  out.max_residual = constraint_residual(p, out.x);
  out.certified_lower = face_bound(p, cost, face, ps.w);
  out.status = ps.sol.converged ? SdpStatus::optimal : SdpStatus::not_converged;
  if (!ps.sol.converged) {
    out.message = "interior-point iteration limit or breakdown (merit " + std::to_string(ps.sol.merit) + ")";
  }
  return out;
}

InteriorPoint find_interior_point(const SdpProblem& p, double tol, const SdpOptions& opts) {
  InteriorPoint out;
  const Face face = find_face(p);
  PlainInterior pi;
  bool solved = false;
  if (proper_face(face, p.dim())) {
    pi = interior_plain(compress(p, face).q, opts);
    if (pi.consistent) {
      pi.x = herm(face.v * pi.x * face.v.adjoint());
      solved = true;
    }
  }
  if (!solved) pi = interior_plain(p, opts);
  if (!pi.consistent) {
    out.message = pi.message;
    return out;
  }
  out.x = pi.x;
  out.min_eig = min_eigenvalue(out.x);
  out.max_residual = constraint_residual(p, out.x);
  if (!pi.converged && out.max_residual > 1e-7) {
    out.message = "feasibility program did not converge";
    return out;
  }
  out.feasible = out.min_eig >= -tol && out.max_residual <= 1e-7;
  if (!out.feasible) out.message = "no positive semidefinite operator satisfies the constraints";
  return out;
}

}  // namespace cascadeqkd
