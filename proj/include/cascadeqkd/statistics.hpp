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

// Acceptance-test statistics shared by the channel simulator, the protocol
// builder and the decoy analysis.

#include <Eigen/Dense>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace cascadeqkd {

enum class Protocol { qubit, decoy };
enum class Graining { fine, sifted_fine, coarse };

std::string_view to_string(Protocol p);
std::string_view to_string(Graining g);
Protocol parse_protocol(std::string_view s);
Graining parse_graining(std::string_view s);

/// Alice's signal symbols (table rows) and Bob's outcomes (table columns).
/// Index 4 of Bob's outcomes is the no-detection event.
inline constexpr std::array<std::string_view, 4> kAliceSymbols = {"H", "V", "+", "-"};
inline constexpr std::array<std::string_view, 5> kBobOutcomes = {"H", "V", "+", "-", "vac"};
inline constexpr int kNoClick = 4;

/// Basis (0 = Z, 1 = X) and bit value of a symbol index 0..3.
inline constexpr int symbol_basis(int s) { return s / 2; }
inline constexpr int symbol_bit(int s) { return s % 2; }

std::string cell_label(int x, int y);

/// Joint probabilities gamma_{x,y}. Qubit tables are one 4x4 block; decoy
/// tables hold one 4x5 block per intensity, the last column being no-click.
struct StatisticsTable {
  Protocol protocol = Protocol::qubit;
  std::vector<double> intensities;
  std::vector<Eigen::MatrixXd> blocks;

  int columns() const { return protocol == Protocol::qubit ? 4 : 5; }
  const Eigen::MatrixXd& qubit() const { return blocks.at(0); }
};

/// Validates entries in [0,1] and row/global sums. Throws std::invalid_argument.
void validate_table(const StatisticsTable& t);

/// One CSV file body (header + 4 rows) for block `index`.
std::string table_to_csv(const StatisticsTable& t, std::size_t index);

}  // namespace cascadeqkd
