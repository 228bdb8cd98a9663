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

// Minimization of f(rho) = D(G(rho) || Z(G(rho))) over the feasible set by a
// conditional-gradient method with certified lower bounds, the F versus F'
// comparison, and the key-rate formulas built from them.

#include "cascadeqkd/protocol.hpp"
#include "cascadeqkd/sdp.hpp"

#include <string>
#include <vector>

namespace cascadeqkd {

struct SolverOptions {
  double gap_target = 1e-4;
  int max_iters = 2000;
  double clip = kDefaultClip;
  SdpOptions sdp;
};

/// f(rho) in bits, computed from the spectra of G(rho) and Z(G(rho)).
double objective(const CMat& rho, const ProtocolMaps& maps);
double objective(const DensityOperator& rho, const ProtocolMaps& maps);

/// G^dagger(log2 G(rho)) - G^dagger(log2 Z(G(rho))), spectra clipped at `clip`.
HermitianOperator gradient(const CMat& rho, const ProtocolMaps& maps, double clip = kDefaultClip);
HermitianOperator gradient(const DensityOperator& rho, const ProtocolMaps& maps, double clip = kDefaultClip);

/// The map G split into its blocks. Each block collects the Kraus operators
/// whose ranges overlap, restricted to the rows they touch; rows are tagged
/// with the key value. Evaluations on blocks are exact and much cheaper than
/// on the full output space.
class BlockedKeyMap {
 public:
  explicit BlockedKeyMap(const ProtocolMaps& maps);

  double objective(const CMat& rho) const;
  /// Objective of the perturbed map (1-eps) G + eps Tr(M rho) I/d'.
  double perturbed_objective(const CMat& rho, double eps) const;
  /// Exact gradient of the perturbed objective.
  CMat perturbed_gradient(const CMat& rho, double eps) const;
  /// Worst-case |f - f_eps| over the feasible set.
  double perturbation_slack(double eps) const;

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

 private:
  struct Block {
    std::vector<CMat> kraus;     // rows restricted to the block
    std::vector<int> key_start;  // row offsets of each key value, plus end
  };
  std::vector<Block> blocks_;
  CMat completeness_;
  int in_dim_ = 0;
  int out_dim_ = 0;
};

enum class SolveStatus { converged, inconclusive, infeasible };
std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::inconclusive;
  double upper = 0.0;
  double lower = 0.0;
  DensityOperator rho_star;
  int iterations = 0;
  double gap = 0.0;
  /// Perturbation slack subtracted from every lower bound.
  double clip_slack = 0.0;
  double max_residual = 0.0;
  std::vector<double> upper_history;
  std::vector<double> lower_history;
  std::string diagnostics;
};

/// Throws std::invalid_argument when the constraint operators do not match
/// the input dimension of `maps`.
SolveResult minimize(const ProtocolMaps& maps, const std::vector<ObservableConstraint>& constraints,
                     const SolverOptions& opts = {});

/// Linear-objective problem over the constraint set with the given cost.
SdpProblem make_sdp_problem(const CMat& cost, const std::vector<ObservableConstraint>& constraints);

enum class VerdictKind { equal, strictly_greater, inconclusive };
std::string verdict_symbol(VerdictKind v);  // "=", ">", "?"

struct Verdict {
  VerdictKind kind = VerdictKind::inconclusive;
  /// lower(F) - upper(F').
  double margin = 0.0;
};

inline constexpr double kVerdictTolerance = 1e-4;

Verdict classify(const SolveResult& f, const SolveResult& f_prime, double tol = kVerdictTolerance);

struct Comparison {
  SolveResult f;
  SolveResult f_prime;
  Verdict verdict;
};

Comparison compare(const ProtocolMaps& maps_plain, const ProtocolMaps& maps_w,
                   const std::vector<ObservableConstraint>& constraints, const SolverOptions& opts = {});

struct KeyRateReport {
  SolveResult f;
  SolveResult f_prime;
  double e = 0.0;
  double f_eff = 1.0;
  double p_pass = 0.0;
  double r_incorrect = 0.0;
  double r_naive = 0.0;
  double r_corrected = 0.0;
  bool clamped = false;
};

/// R_incorrect = F.lower - p f h(e), R_naive = F.lower - 2 p f h(e),
/// R_corrected = F'.lower - p f h(e). Negative rates are clamped to 0 and
/// flagged when `clamp` is set.
KeyRateReport assemble_keyrates(const SolveResult& f, const SolveResult& f_prime, double e, double f_eff,
                                double p_pass, bool clamp = true);

/// scenario,F_low,F_up,Fp_low,Fp_up,verdict,margin,R_incorrect,R_naive,R_corrected
std::string keyrate_csv_header();
std::string keyrate_csv_row(const std::string& scenario_id, const KeyRateReport& r, const Verdict& v);

}  // namespace cascadeqkd
