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

// Photon-number decomposition of decoy-state statistics: Poisson weights,
// per-statistic linear programs bounding the single-photon yields, interval
// constraints for the single-photon key-rate problem, and the photon-number
// split of the key-rate objective.

#include "cascadeqkd/protocol.hpp"
#include "cascadeqkd/statistics.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace cascadeqkd {

struct PhotonCutoff {
  int n_max = 10;
};

/// mu^n e^{-mu} / n!
double poisson_weight(double mu, int n);

/// Bounds on gamma^1_{y|x} for one statistic.
struct YieldInterval {
  double low = 0.0;
  double high = 1.0;
  /// |primal - certified dual| of the min and max programs.
  double gap_low = 0.0;
  double gap_high = 0.0;
};

/// Bounds for every (x, y) cell of the 4x5 decoy table, as conditional yields.
struct YieldBounds {
  std::array<std::array<YieldInterval, 5>, 4> cells{};
  PhotonCutoff cutoff;

  double max_duality_gap() const;
};

class DecoyInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Certified minimum and maximum of gamma^1 for one statistic given its
/// observed conditional value at each intensity. Variables gamma^n, n <= N,
/// lie in [0, 1] and satisfy, for every intensity,
///   sum_{n<=N} p(n) gamma^n <= observed <= sum_{n<=N} p(n) gamma^n + tail.
/// Throws DecoyInfeasibleError when no yields reproduce the observations.
YieldInterval solve_single_yield(std::span<const double> observed, std::span<const double> intensities,
                                 PhotonCutoff cutoff);

/// `observed[i]` is the 4x5 matrix of conditional yields gamma^{mu_i}_{y|x}.
YieldBounds solve_yield_bounds(const std::vector<Eigen::MatrixXd>& observed,
                               std::span<const double> intensities, PhotonCutoff cutoff);

/// Same, from joint per-intensity tables (Pr(x) = 1/4).
YieldBounds solve_yield_bounds(const StatisticsTable& table, PhotonCutoff cutoff);

/// Interval constraints on joint single-photon probabilities
/// gamma^1_{x,y} = gamma^1_{y|x} / 4. Coarse statistics add the bounds of their
/// cells. Source-replacement and trace constraints are not included.
std::vector<ObservableConstraint> assemble_interval_constraints(const YieldBounds& b, Graining graining);

struct PhotonSplitRates {
  double f_total = 0.0;
  double f_prime_total = 0.0;
  double zero_photon_f = 0.0;        // p_0 * p_pass^0
  double zero_photon_f_prime = 0.0;  // always 0
};

/// Lower bounds on the full objectives from the single-photon values. Terms
/// with more than one photon contribute nothing.
PhotonSplitRates photon_split_keyrate(double f1, double f1_prime, double p_pass0, double mu_signal);

/// CSV with columns statistic,low,high.
std::string yield_bounds_to_csv(const YieldBounds& b);

}  // namespace cascadeqkd
