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

#include "cascadeqkd/decoy.hpp"

#include "cascadeqkd/channel.hpp"
#include "cascadeqkd/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cascadeqkd {

double poisson_weight(double mu, int n) {
  if (mu < 0.0 || n < 0) throw std::invalid_argument("poisson_weight: mu and n must be nonnegative");
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mu) - mu - std::lgamma(n + 1.0));
}

double YieldBounds::max_duality_gap() const {
  double g = 0.0;
  for (const auto& row : cells) {
    for (const auto& c : row) g = std::max({g, c.gap_low, c.gap_high});
  }
  return g;
}

namespace {

struct DecoyLp {
  Eigen::MatrixXd weights;  // intensities x (N+1)
  Eigen::VectorXd upper;    // observed
  Eigen::VectorXd lower;    // observed - tail
};

DecoyLp make_lp(std::span<const double> observed, std::span<const double> intensities, int n_max) {
  const int k = static_cast<int>(intensities.size());
  DecoyLp lp;
  lp.weights.resize(k, n_max + 1);
  lp.upper.resize(k);
  lp.lower.resize(k);
  for (int i = 0; i < k; ++i) {
    double kept = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      lp.weights(i, n) = poisson_weight(intensities[i], n);
      kept += lp.weights(i, n);
    }
    const double tail = std::max(0.0, 1.0 - kept);
    lp.upper(i) = observed[i];
    lp.lower(i) = observed[i] - tail;
  }
  return lp;
}

// Certified lower bound on min c.g over the LP for any multipliers lambda:
//   c.g >= sum_i min(lambda_i lo_i, lambda_i up_i) + sum_n min(0, (c - W^T lambda)_n).
double certified_lower(const DecoyLp& lp, const Eigen::VectorXd& c, const Eigen::VectorXd& lambda) {
  double v = 0.0;
  for (int i = 0; i < lambda.size(); ++i) {
    v += std::min(lambda(i) * lp.lower(i), lambda(i) * lp.upper(i));
  }
  const Eigen::VectorXd red = c - lp.weights.transpose() * lambda;
  for (int n = 0; n < red.size(); ++n) v += std::min(0.0, red(n));
  return v;
}

// min c.g; returns (certified bound, primal value).
std::pair<double, double> solve_direction(const DecoyLp& lp, const Eigen::VectorXd& c) {
  const int k = static_cast<int>(lp.weights.rows());
  const int nv = static_cast<int>(lp.weights.cols());
  // Variables: g (nv), s_up (k), s_lo (k), u (nv).
  //   W g + s_up = upper;  W g - s_lo = lower;  g + u = 1.
  const int cols = nv + 2 * k + nv;
  const int rows = 2 * k + nv;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < k; ++i) {
    a.row(i).head(nv) = lp.weights.row(i);
    a(i, nv + i) = 1.0;
    b(i) = lp.upper(i);
    a.row(k + i).head(nv) = lp.weights.row(i);
    a(k + i, nv + k + i) = -1.0;
    b(k + i) = lp.lower(i);
  }
  for (int n = 0; n < nv; ++n) {
    a(2 * k + n, n) = 1.0;
    a(2 * k + n, nv + 2 * k + n) = 1.0;
    b(2 * k + n) = 1.0;
  }
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  cost.head(nv) = c;
  const LpResult r = solve_standard_lp(cost, a, b);
  if (r.status == LpStatus::infeasible) {
    throw DecoyInfeasibleError("decoy observations are inconsistent with the Poisson model");
  }
  if (r.status != LpStatus::optimal) throw std::runtime_error("decoy linear program did not converge");
  // Row multipliers of the two intensity inequalities act on the same W g.
  Eigen::VectorXd lambda = r.y.head(k) + r.y.segment(k, k);
  return {certified_lower(lp, c, lambda), r.objective};
}

}  // namespace

YieldInterval solve_single_yield(std::span<const double> observed, std::span<const double> intensities,
                                 PhotonCutoff cutoff) {
  if (observed.size() != intensities.size() || intensities.empty()) {
    throw std::invalid_argument("solve_single_yield: need one observation per intensity");
  }
  if (cutoff.n_max < 1) throw std::invalid_argument("photon cutoff must be at least 1");
  const DecoyLp lp = make_lp(observed, intensities, cutoff.n_max);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(cutoff.n_max + 1);
  e1(1) = 1.0;
  const auto [lo_cert, lo_primal] = solve_direction(lp, e1);
  const auto [hi_cert, hi_primal] = solve_direction(lp, -e1);
  YieldInterval out;
  out.low = std::clamp(lo_cert, 0.0, 1.0);
  out.high = std::clamp(-hi_cert, 0.0, 1.0);
  out.gap_low = std::abs(lo_primal - lo_cert);
  out.gap_high = std::abs(hi_primal - hi_cert);
  return out;
}

YieldBounds solve_yield_bounds(const std::vector<Eigen::MatrixXd>& observed,
                               std::span<const double> intensities, PhotonCutoff cutoff) {
  if (observed.size() != intensities.size()) {
    throw std::invalid_argument("solve_yield_bounds: one table per intensity required");
  }
  YieldBounds out;
  out.cutoff = cutoff;
  std::vector<double> obs(intensities.size());
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 5; ++y) {
      for (std::size_t i = 0; i < intensities.size(); ++i) obs[i] = observed[i](x, y);
      out.cells[x][y] = solve_single_yield(obs, intensities, cutoff);
    }
  }
  return out;
}

YieldBounds solve_yield_bounds(const StatisticsTable& table, PhotonCutoff cutoff) {
  if (table.protocol != Protocol::decoy) throw std::invalid_argument("solve_yield_bounds: not a decoy table");
  std::vector<Eigen::MatrixXd> cond;
  for (const auto& b : table.blocks) cond.push_back(conditional_yields(b));
  return solve_yield_bounds(cond, table.intensities, cutoff);
}

std::vector<ObservableConstraint> assemble_interval_constraints(const YieldBounds& b, Graining graining) {
  constexpr double prob_x = 0.25;
  std::vector<ObservableConstraint> out;
  if (graining == Graining::coarse) {
    for (const auto& cs : coarse_statistics()) {
      CMat op = CMat::Zero(6, 6);
      double lo = 0.0, hi = 0.0;
      for (auto [x, y] : cs.cells) {
        op += cell_operator(Protocol::decoy, x, y);
        lo += prob_x * b.cells[x][y].low;
        hi += prob_x * b.cells[x][y].high;
      }
      out.push_back({HermitianOperator(op), ConstraintKind::interval, 0.0, lo, hi, cs.label});
    }
    return out;
  }
  for (auto [x, y] : graining_cells(Protocol::decoy, graining)) {
    const auto& c = b.cells[x][y];
    out.push_back({HermitianOperator(cell_operator(Protocol::decoy, x, y)), ConstraintKind::interval, 0.0,
                   prob_x * c.low, prob_x * c.high, cell_label(x, y)});
  }
  return out;
}

PhotonSplitRates photon_split_keyrate(double f1, double f1_prime, double p_pass0, double mu_signal) {
  if (f1 < 0.0 || f1_prime < 0.0) throw std::invalid_argument("photon_split_keyrate: negative objective");
  const double p0 = poisson_weight(mu_signal, 0);
  const double p1 = poisson_weight(mu_signal, 1);
  PhotonSplitRates r;
  // Without photons Eve learns nothing about Alice's bit, but she knows Bob's
  // bit, so announcing the error locations reveals Alice's bit as well.
  r.zero_photon_f = p0 * p_pass0;
  r.zero_photon_f_prime = 0.0;
  r.f_total = p1 * f1 + r.zero_photon_f;
  r.f_prime_total = p1 * f1_prime + r.zero_photon_f_prime;
  return r;
}

std::string yield_bounds_to_csv(const YieldBounds& b) {
  std::ostringstream os;
  os.precision(17);
  os << "statistic,low,high\n";
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 5; ++y) {
      os << cell_label(x, y) << ',' << b.cells[x][y].low << ',' << b.cells[x][y].high << '\n';
    }
  }
  return os.str();
}

}  // namespace cascadeqkd
