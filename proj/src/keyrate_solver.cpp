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

#include "cascadeqkd/keyrate_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cascadeqkd {

namespace {

CMat herm(const CMat& m) { return 0.5 * (m + m.adjoint()); }

void check_dim(const CMat& rho, const ProtocolMaps& maps) {
  if (rho.rows() != maps.in_dim() || rho.cols() != maps.in_dim()) {
    throw DimensionError("state dimension does not match the protocol input registers");
  }
}

// Spectral decomposition with eigenvalues floored at `clip`, returning log2.
CMat log2_floor(const CMat& x, double clip) {
  const Spectrum s = eigh(x);
  RVec l(s.values.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) l(i) = std::log2(std::max(s.values(i), clip));
  return s.vectors * l.asDiagonal() * s.vectors.adjoint();
}

double entropy_blocks(const CMat& g, const std::vector<int>& starts) {
  double h = 0.0;
  for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
    const int len = starts[k + 1] - starts[k];
    if (len > 0) h += entropy2(g.block(starts[k], starts[k], len, len));
  }
  return h;
}

CMat pinch_blocks(const CMat& g, const std::vector<int>& starts) {
  CMat out = CMat::Zero(g.rows(), g.cols());
  for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
    const int len = starts[k + 1] - starts[k];
    out.block(starts[k], starts[k], len, len) = g.block(starts[k], starts[k], len, len);
  }
  return out;
}

// Negative eigenvalues left by rounding are set to zero, keeping the trace.
CMat psd_part(const CMat& x) {
  const Spectrum s = eigh(herm(x));
  if (s.values.minCoeff() >= 0.0) return herm(x);
  RVec v = s.values.cwiseMax(0.0);
  v *= s.values.sum() / v.sum();
  return herm(s.vectors * v.asDiagonal() * s.vectors.adjoint());
}

// Alternating projections onto the affine constraints and the PSD cone.
// Interval rows join the affine system at their nearest bound while they
// are violated. The returned point is the best visited one by constraint
// residual plus negative eigenvalue mass.
CMat polish(const SdpProblem& p, const CMat& x0) {
  if (p.eq_ops.empty() && p.iv_ops.empty()) return x0;
  auto defect = [&](const CMat& x) { return constraint_residual(p, x) - std::min(0.0, min_eigenvalue(x)); };
  CMat x = x0, best = x0;
  double best_defect = defect(x0);
  for (int k = 0; k < 60 && best_defect > 1e-15; ++k) {
    std::vector<const CMat*> rows;
    std::vector<double> r;
    for (std::size_t i = 0; i < p.eq_ops.size(); ++i) {
      rows.push_back(&p.eq_ops[i]);
      r.push_back(p.eq_rhs[i] - hs_inner(p.eq_ops[i], x));
    }
    for (std::size_t j = 0; j < p.iv_ops.size(); ++j) {
      const double v = hs_inner(p.iv_ops[j], x);
      if (v < p.iv_low[j] || v > p.iv_high[j]) {
        rows.push_back(&p.iv_ops[j]);
        r.push_back((v < p.iv_low[j] ? p.iv_low[j] : p.iv_high[j]) - v);
      }
    }
    const int m = static_cast<int>(rows.size());
    RMat gram(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) gram(i, j) = hs_inner(*rows[i], *rows[j]);
    }
    const RVec c = Eigen::CompleteOrthogonalDecomposition<RMat>(gram).solve(
        Eigen::Map<const RVec>(r.data(), m));
    for (int i = 0; i < m; ++i) x += c(i) * *rows[i];
    const Spectrum s = eigh(herm(x));
    x = herm(s.vectors * s.values.cwiseMax(0.0).asDiagonal() * s.vectors.adjoint());
    const double d = defect(x);
    if (d < best_defect) {
      best_defect = d;
      best = x;
    }
  }
  // Every problem fixes the trace, so exact normalization only helps.
  return best / best.trace().real();
}

}  // namespace

double objective(const CMat& rho, const ProtocolMaps& maps) {
  check_dim(rho, maps);
  const CMat g = apply_g(maps, rho);
  return entropy2(apply_pinch(maps, g)) - entropy2(g);
}

double objective(const DensityOperator& rho, const ProtocolMaps& maps) { return objective(rho.matrix(), maps); }

HermitianOperator gradient(const CMat& rho, const ProtocolMaps& maps, double clip) {
  check_dim(rho, maps);
  const CMat g = apply_g(maps, rho);
  const CMat diff = log2_floor(g, clip) - log2_floor(apply_pinch(maps, g), clip);
  return HermitianOperator::hermitian_part(apply_g_adjoint(maps, diff));
}

HermitianOperator gradient(const DensityOperator& rho, const ProtocolMaps& maps, double clip) {
  return gradient(rho.matrix(), maps, clip);
}

// --- BlockedKeyMap ---------------------------------------------------------

BlockedKeyMap::BlockedKeyMap(const ProtocolMaps& maps)
    : completeness_(kraus_completeness(maps)), in_dim_(maps.in_dim()), out_dim_(maps.out_dim()) {
  const int nk = static_cast<int>(maps.g_kraus.size());
  std::vector<std::vector<int>> rows(nk);
  for (int k = 0; k < nk; ++k) {
    const CMat& m = maps.g_kraus[k].matrix();
    for (int r = 0; r < m.rows(); ++r) {
      if (m.row(r).cwiseAbs().maxCoeff() > 1e-15) rows[k].push_back(r);
    }
  }
  std::vector<int> parent(nk);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<int> owner(out_dim_, -1);
  for (int k = 0; k < nk; ++k) {
    for (int r : rows[k]) {
      if (owner[r] < 0) {
        owner[r] = k;
      } else {
        parent[find(k)] = find(owner[r]);
      }
    }
  }
  const int half = out_dim_ / 2;
  std::vector<int> roots;
  for (int k = 0; k < nk; ++k) {
    if (rows[k].empty()) continue;
    const int root = find(k);
    if (std::find(roots.begin(), roots.end(), root) != roots.end()) continue;
    roots.push_back(root);
    std::vector<int> members;
    std::vector<int> block_rows;
    for (int j = 0; j < nk; ++j) {
      if (!rows[j].empty() && find(j) == root) {
        members.push_back(j);
        block_rows.insert(block_rows.end(), rows[j].begin(), rows[j].end());
      }
    }
    std::sort(block_rows.begin(), block_rows.end());
    block_rows.erase(std::unique(block_rows.begin(), block_rows.end()), block_rows.end());
    Block b;
    for (int j : members) {
      const CMat& m = maps.g_kraus[j].matrix();
      CMat sub(block_rows.size(), m.cols());
      for (std::size_t i = 0; i < block_rows.size(); ++i) sub.row(i) = m.row(block_rows[i]);
      b.kraus.push_back(std::move(sub));
    }
    b.key_start.push_back(0);
    for (std::size_t i = 1; i < block_rows.size(); ++i) {
      if (block_rows[i] / half != block_rows[i - 1] / half) b.key_start.push_back(static_cast<int>(i));
    }
    b.key_start.push_back(static_cast<int>(block_rows.size()));
    blocks_.push_back(std::move(b));
  }
}

double BlockedKeyMap::objective(const CMat& rho) const { return perturbed_objective(rho, 0.0); }

double BlockedKeyMap::perturbed_objective(const CMat& rho, double eps) const {
  const double shift = eps * hs_inner(completeness_, rho) / out_dim_;
  double f = 0.0;
  for (const Block& b : blocks_) {
    const int d = static_cast<int>(b.kraus.front().rows());
    CMat g = CMat::Zero(d, d);
    for (const CMat& k : b.kraus) g += k * rho * k.adjoint();
    g = herm((1.0 - eps) * g + shift * CMat::Identity(d, d));
    f += entropy_blocks(g, b.key_start) - entropy2(g);
  }
  return f;
}

CMat BlockedKeyMap::perturbed_gradient(const CMat& rho, double eps) const {
  const double shift = eps * hs_inner(completeness_, rho) / out_dim_;
  CMat grad = CMat::Zero(in_dim_, in_dim_);
  double trace_diff = 0.0;
  for (const Block& b : blocks_) {
    const int d = static_cast<int>(b.kraus.front().rows());
    CMat g = CMat::Zero(d, d);
    for (const CMat& k : b.kraus) g += k * rho * k.adjoint();
    g = herm((1.0 - eps) * g + shift * CMat::Identity(d, d));
    const double floor = eps > 0.0 ? std::numeric_limits<double>::min() : kDefaultClip;
    const CMat diff = log2_floor(g, floor) - log2_floor(pinch_blocks(g, b.key_start), floor);
    trace_diff += diff.trace().real();
    for (const CMat& k : b.kraus) grad += (1.0 - eps) * (k.adjoint() * diff * k);
  }
  grad += eps * trace_diff / out_dim_ * completeness_;
  return herm(grad);
}

double BlockedKeyMap::perturbation_slack(double eps) const {
  return 2.0 * (eps * std::log2(out_dim_ - 1.0) + binary_entropy(eps));
}

// --- minimize --------------------------------------------------------------

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::inconclusive:
      return "inconclusive";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "?";
}

SdpProblem make_sdp_problem(const CMat& cost, const std::vector<ObservableConstraint>& constraints) {
  SdpProblem p;
  p.cost = cost;
  for (const auto& c : constraints) {
    if (c.gamma_op.dim() != cost.rows()) throw DimensionError("constraint operator dimension mismatch");
    if (c.kind == ConstraintKind::equality) {
      p.eq_ops.push_back(c.gamma_op.matrix());
      p.eq_rhs.push_back(c.value);
    } else {
      p.iv_ops.push_back(c.gamma_op.matrix());
      p.iv_low.push_back(c.low);
      p.iv_high.push_back(c.high);
    }
  }
  return p;
}

SolveResult minimize(const ProtocolMaps& maps, const std::vector<ObservableConstraint>& constraints,
                     const SolverOptions& opts) {
  const int n = maps.in_dim();
  SolveResult res;
  const BlockedKeyMap bm(maps);
  SdpProblem problem = make_sdp_problem(CMat::Zero(n, n), constraints);
  const InteriorPoint ip = find_interior_point(problem, 1e-7, opts.sdp);
  if (!ip.feasible) {
    res.status = SolveStatus::infeasible;
    res.diagnostics = "infeasible: " + ip.message;
    return res;
  }
  const double eps = opts.clip;
  res.clip_slack = bm.perturbation_slack(eps);

  // Pairwise conditional gradient: rho is kept as a convex combination of
  // linear-minimization outputs, and each step moves weight from the atom
  // with the largest linearized value onto the new one.
  std::vector<CMat> atoms{polish(problem, psd_part(ip.x))};
  std::vector<double> weights{1.0};
  CMat rho = atoms.front();
  CMat best = rho;
  res.upper = std::numeric_limits<double>::infinity();
  res.lower = -std::numeric_limits<double>::infinity();
  int lmo_failures = 0;
  int it = 0;
  bool stalled = false;
  for (; it < opts.max_iters; ++it) {
    const double f_now = bm.objective(rho);
    if (f_now < res.upper) {
      res.upper = f_now;
      best = rho;
    }
    const CMat g = bm.perturbed_gradient(rho, eps);
    problem.cost = g;
    const SdpResult lmo = solve_linear_sdp(problem, opts.sdp);
    if (lmo.status == SdpStatus::infeasible) {
      res.status = SolveStatus::infeasible;
      res.diagnostics = "infeasible: " + lmo.message;
      return res;
    }
    // The dual bound is valid for any multipliers, converged or not.
    if (std::isfinite(lmo.certified_lower)) {
      const double lb = bm.perturbed_objective(rho, eps) - hs_inner(g, rho) + lmo.certified_lower - res.clip_slack;
      res.lower = std::max(res.lower, lb);
    }
    if (lmo.status != SdpStatus::optimal) ++lmo_failures;
    res.upper_history.push_back(res.upper);
    res.lower_history.push_back(res.lower);
    if (res.upper - res.lower <= opts.gap_target) break;
    if (lmo.x.size() == 0 || lmo.max_residual > 1e-8) break;

    const CMat sigma = polish(problem, psd_part(lmo.x));
    std::size_t away = 0;
    for (std::size_t i = 1; i < atoms.size(); ++i) {
      if (hs_inner(g, atoms[i]) > hs_inner(g, atoms[away])) away = i;
    }
    const CMat d = sigma - atoms[away];
    const double gamma_max = weights[away];
    // Exact line search on the convex restriction to the segment.
    auto slope = [&](double gamma) { return hs_inner(bm.perturbed_gradient(rho + gamma * d, eps), d); };
    if (slope(0.0) >= 0.0) {
      stalled = true;
      break;
    }
    double gamma = gamma_max;
    if (slope(gamma_max) > 0.0) {
      double lo = 0.0, hi = gamma_max;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? hi : lo) = mid;
      }
      gamma = 0.5 * (lo + hi);
    }
    weights[away] -= gamma;
    atoms.push_back(sigma);
    weights.push_back(gamma);
    if (weights[away] <= 1e-15) {
      atoms.erase(atoms.begin() + away);
      weights.erase(weights.begin() + away);
    }
    rho = CMat::Zero(n, n);
    for (std::size_t i = 0; i < atoms.size(); ++i) rho += weights[i] * atoms[i];
    rho = herm(rho);
  }
  res.iterations = std::min(it + 1, opts.max_iters);
  res.gap = res.upper - res.lower;
  res.status = res.gap <= opts.gap_target ? SolveStatus::converged : SolveStatus::inconclusive;
  res.max_residual = constraint_residual(problem, best);
  try {
    res.rho_star = DensityOperator(herm(best));
  } catch (const std::invalid_argument&) {
    res.status = SolveStatus::inconclusive;
  }
  std::ostringstream os;
  os.precision(6);
  os << "status=" << to_string(res.status) << " iterations=" << res.iterations << " gap=" << res.gap
     << " clip_slack=" << res.clip_slack << " residual=" << res.max_residual << " lmo_failures=" << lmo_failures
     << " interior_min_eig=" << ip.min_eig;
  if (stalled) os << " stalled=1";
  res.diagnostics = os.str();
  return res;
}

// --- comparison and rates --------------------------------------------------

std::string verdict_symbol(VerdictKind v) {
  switch (v) {
    case VerdictKind::equal:
      return "=";
    case VerdictKind::strictly_greater:
      return ">";
    case VerdictKind::inconclusive:
      return "?";
  }
  return "?";
}

Verdict classify(const SolveResult& f, const SolveResult& f_prime, double tol) {
  Verdict v;
  v.margin = f.lower - f_prime.upper;
  if (f.status != SolveStatus::converged || f_prime.status != SolveStatus::converged) return v;
  const bool overlap = f.lower <= f_prime.upper && f_prime.lower <= f.upper;
  if (overlap) {
    v.kind = VerdictKind::equal;
  } else if (v.margin > tol) {
    v.kind = VerdictKind::strictly_greater;
  }
  return v;
}

Comparison compare(const ProtocolMaps& maps_plain, const ProtocolMaps& maps_w,
                   const std::vector<ObservableConstraint>& constraints, const SolverOptions& opts) {
  Comparison c;
  c.f = minimize(maps_plain, constraints, opts);
  c.f_prime = minimize(maps_w, constraints, opts);
  c.verdict = classify(c.f, c.f_prime);
  return c;
}

KeyRateReport assemble_keyrates(const SolveResult& f, const SolveResult& f_prime, double e, double f_eff,
                                double p_pass, bool clamp) {
  if (e < 0.0 || e > 0.5) throw std::invalid_argument("QBER must lie in [0, 0.5]");
  if (f_eff < 1.0) throw std::invalid_argument("error-correction efficiency must be at least 1");
  KeyRateReport r;
  r.f = f;
  r.f_prime = f_prime;
  r.e = e;
  r.f_eff = f_eff;
  r.p_pass = p_pass;
  const double leak = p_pass * f_eff * binary_entropy(e);
  r.r_incorrect = f.lower - leak;
  r.r_naive = f.lower - 2.0 * leak;
  r.r_corrected = f_prime.lower - leak;
  if (clamp) {
    for (double* v : {&r.r_incorrect, &r.r_naive, &r.r_corrected}) {
      if (*v < 0.0) {
        *v = 0.0;
        r.clamped = true;
      }
    }
  }
  return r;
}

std::string keyrate_csv_header() {
  return "scenario,F_low,F_up,Fp_low,Fp_up,verdict,margin,R_incorrect,R_naive,R_corrected";
}

std::string keyrate_csv_row(const std::string& scenario_id, const KeyRateReport& r, const Verdict& v) {
  std::ostringstream os;
  os.precision(10);
  os << scenario_id << ',' << r.f.lower << ',' << r.f.upper << ',' << r.f_prime.lower << ',' << r.f_prime.upper
     << ',' << verdict_symbol(v.kind) << ',' << v.margin << ',' << r.r_incorrect << ',' << r.r_naive << ','
     << r.r_corrected;
  return os.str();
}

}  // namespace cascadeqkd
