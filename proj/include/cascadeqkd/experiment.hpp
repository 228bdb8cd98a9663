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

// Scenario configuration, parameter sweeps, verdict grids, Cascade batches,
// decoy bound reports and the invariant suite behind the command-line tool.

#include "cascadeqkd/cascade.hpp"
#include "cascadeqkd/channel.hpp"
#include "cascadeqkd/keyrate_solver.hpp"
#include "cascadeqkd/statistics.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascadeqkd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  std::string variable = "none";  // none | theta_deg | q | eta
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
};

struct Table2Config {
  std::vector<double> theta_deg{5.0, 10.0, 15.0};
  double q = 0.1;
  double lambda_rep = 0.2;
};

struct Table4Config {
  std::vector<double> eta{0.5, 0.1};
  double sin2_theta = 0.06;
  std::vector<double> intensities{0.5, 0.1, 0.001};
  double lambda_rep = 0.2;
};

struct CascadeConfig {
  int n = 10000;
  std::vector<double> e{0.01, 0.02, 0.05, 0.1};
  int seeds = 100;
  std::uint64_t seed = 1;
  int k1 = 0;
  int passes = 4;
  int growth = 2;
};

struct ScenarioConfig {
  Protocol protocol = Protocol::qubit;
  ChannelScenario channel;  // theta in radians after parsing
  std::vector<Graining> grainings{Graining::coarse, Graining::sifted_fine, Graining::fine};
  SweepSpec sweep;
  SolverOptions solver;
  double f_eff = 1.16;
  int photon_cutoff = 10;
  Table2Config table2;
  Table4Config table4;
  CascadeConfig cascade;
};

/// Unknown keys, wrong types and out-of-range values raise ConfigError naming
/// the offending field.
ScenarioConfig parse_config(const nlohmann::json& j);
/// Parse errors report the line and column.
ScenarioConfig load_config(const std::string& path);

/// Runs `count` tasks on up to `jobs` threads; task(i) must be independent.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

/// Observed QBER (Z basis, conditional on sifting and detection) and the
/// sifting-and-detection probability of a joint table.
struct SiftedStats {
  double e = 0.0;
  double p_pass = 0.0;
};
SiftedStats sifted_stats(const Eigen::MatrixXd& joint);

struct PointResult {
  std::string scenario;
  std::string column;
  Graining graining = Graining::fine;
  double sweep_value = 0.0;
  Comparison cmp;
  KeyRateReport report;
};

struct CommandOutput {
  /// File name -> contents, written under --out.
  std::vector<std::pair<std::string, std::string>> files;
  std::string summary;
  int exit_code = 0;
};

CommandOutput cmd_keyrate(const ScenarioConfig& cfg, int jobs);
CommandOutput cmd_table2(const ScenarioConfig& cfg, int jobs);
CommandOutput cmd_table4(const ScenarioConfig& cfg, int jobs);
CommandOutput cmd_cascade(const ScenarioConfig& cfg, int jobs);
CommandOutput cmd_decoy_bounds(const ScenarioConfig& cfg);
CommandOutput cmd_verify(const ScenarioConfig& cfg, std::uint64_t seed, int jobs);

/// Aggregates per-gridpoint verdicts into one cell: "?" if any point is
/// inconclusive, ">" if any point is strictly greater, "=" otherwise.
VerdictKind aggregate_verdicts(const std::vector<VerdictKind>& v);

struct VerdictGrid {
  std::vector<std::string> columns;
  std::vector<Graining> rows;
  std::vector<std::vector<VerdictKind>> cells;  // [row][column]
  std::vector<PointResult> points;
};

VerdictGrid qubit_verdict_grid(const ScenarioConfig& cfg, int jobs);
VerdictGrid decoy_verdict_grid(const ScenarioConfig& cfg, int jobs);

std::string grid_to_csv(const VerdictGrid& g);
std::string points_to_csv(const std::vector<PointResult>& pts);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Largest relative error between the directional derivative <grad, D> and
/// central differences of `f` over random feasible points and directions.
double gradient_fd_error(const ProtocolMaps& maps, int points, std::uint64_t seed, bool flip_sign = false);

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed);

}  // namespace cascadeqkd
