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

#include "cascadeqkd/channel.hpp"

#include "cascadeqkd/protocol.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cascadeqkd {

std::string_view to_string(Protocol p) { return p == Protocol::qubit ? "qubit" : "decoy"; }

std::string_view to_string(Graining g) {
  switch (g) {
    case Graining::fine: return "fine";
    case Graining::sifted_fine: return "sifted_fine";
    case Graining::coarse: return "coarse";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "qubit") return Protocol::qubit;
  if (s == "decoy") return Protocol::decoy;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "'");
}

Graining parse_graining(std::string_view s) {
  if (s == "fine") return Graining::fine;
  if (s == "sifted_fine" || s == "sifted") return Graining::sifted_fine;
  if (s == "coarse") return Graining::coarse;
  throw std::invalid_argument("unknown graining '" + std::string(s) + "'");
}

std::string cell_label(int x, int y) {
  return std::string(kAliceSymbols.at(x)) + std::string(kBobOutcomes.at(y));
}

void validate_table(const StatisticsTable& t) {
  if (t.blocks.empty()) throw std::invalid_argument("statistics table is empty");
  for (const auto& b : t.blocks) {
    if (b.rows() != 4 || b.cols() != t.columns()) throw std::invalid_argument("table shape mismatch");
    if ((b.array() < -1e-15).any() || (b.array() > 1.0 + 1e-15).any()) {
      throw std::invalid_argument("table entries outside [0, 1]");
    }
    if (t.protocol == Protocol::qubit) {
      if (std::abs(b.sum() - 1.0) > 1e-12) throw std::invalid_argument("qubit table does not sum to 1");
    } else {
      for (int x = 0; x < 4; ++x) {
        if (std::abs(b.row(x).sum() - 0.25) > 1e-12) {
          throw std::invalid_argument("decoy table row does not sum to 1/4");
        }
      }
    }
  }
}

std::string table_to_csv(const StatisticsTable& t, std::size_t index) {
  std::ostringstream os;
  os.precision(17);
  os << "alice";
  for (int y = 0; y < t.columns(); ++y) os << ',' << kBobOutcomes[y];
  os << '\n';
  const auto& b = t.blocks.at(index);
  for (int x = 0; x < 4; ++x) {
    os << kAliceSymbols[x];
    for (int y = 0; y < t.columns(); ++y) os << ',' << b(x, y);
    os << '\n';
  }
  return os.str();
}

void ChannelScenario::validate() const {
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  prob(q, "q");
  prob(lambda_rep, "lambda_rep");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (protocol == Protocol::decoy) {
    if (intensities.empty()) throw std::invalid_argument("decoy scenario needs intensities");
    for (std::size_t i = 0; i < intensities.size(); ++i) {
      if (!(intensities[i] > 0.0)) throw std::invalid_argument("intensities must be positive");
      if (i > 0 && !(intensities[i] < intensities[i - 1])) {
        throw std::invalid_argument("intensities must be strictly decreasing");
      }
    }
  }
}

CMat qubit_channel_state(double theta, double q) {
  CMat phi = CMat::Zero(4, 1);
  phi(0, 0) = phi(3, 0) = 1.0 / std::sqrt(2.0);
  CMat rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const CMat u = kron(pauli::identity(), rot);
  const CMat misaligned = u * projector(phi) * u.adjoint();
  const int dims[] = {2, 2};
  const int keep_a[] = {0};
  const CMat rho_a = partial_trace(misaligned, dims, keep_a);
  return (1.0 - q) * misaligned + q * kron(rho_a, 0.5 * pauli::identity());
}

StatisticsTable apply_replacement(StatisticsTable t, double lambda) {
  if (lambda == 0.0) return t;
  for (auto& b : t.blocks) {
    const Eigen::RowVectorXd h = b.row(0);
    for (int x = 0; x < 4; ++x) b.row(x) = (1.0 - lambda) * b.row(x) + lambda * h;
  }
  return t;
}

Eigen::MatrixXd conditional_yields(const Eigen::MatrixXd& joint) { return 4.0 * joint; }

StatisticsTable simulate_qubit_table(const ChannelScenario& s) {
  if (s.protocol != Protocol::qubit) throw std::invalid_argument("simulate_qubit_table: not a qubit scenario");
  s.validate();
  const CMat rho = qubit_channel_state(s.theta, s.q);
  Eigen::MatrixXd t(4, 4);
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 4; ++y) t(x, y) = hs_inner(cell_operator(Protocol::qubit, x, y), rho);
  }
  StatisticsTable out{Protocol::qubit, {}, {t}};
  return apply_replacement(std::move(out), s.lambda_rep);
}

namespace {

// Polarization angle of Alice's symbol, measured like the Y-rotation.
double symbol_angle(int x) {
  constexpr double pi = 3.14159265358979323846;
  constexpr std::array<double, 4> angles = {0.0, pi / 2, pi / 4, -pi / 4};
  return angles[x];
}

// Fraction of the arriving light reaching detectors H, V, +, - (in that
// order) for a pulse in symbol x after rotation theta.
std::array<double, 4> detector_fractions(int x, double theta) {
  constexpr double pi = 3.14159265358979323846;
  const double a = symbol_angle(x) + theta;
  const double cz = std::cos(a), sz = std::sin(a);
  const double cx = std::cos(a - pi / 4), sx = std::sin(a - pi / 4);
  return {0.5 * cz * cz, 0.5 * sz * sz, 0.5 * cx * cx, 0.5 * sx * sx};
}

// Outcome distribution over {H, V, +, -, none} given independent detector
// click probabilities.
std::array<double, 5> resolve_clicks(const std::array<double, 4>& click) {
  std::array<double, 5> out{};
  for (int pattern = 0; pattern < 16; ++pattern) {
    double pr = 1.0;
    for (int d = 0; d < 4; ++d) pr *= (pattern >> d & 1) ? click[d] : 1.0 - click[d];
    if (pr == 0.0) continue;
    const int z = pattern & 3;
    const int xarm = pattern >> 2 & 3;
    // Outcome distribution of one arm's pattern; base = 0 (Z) or 2 (X).
    auto arm = [&](int bits, int base, double weight) {
      if (bits == 1) out[base] += weight;
      else if (bits == 2) out[base + 1] += weight;
      else {
        out[base] += 0.5 * weight;
        out[base + 1] += 0.5 * weight;
      }
    };
    if (z == 0 && xarm == 0) out[kNoClick] += pr;
    else if (xarm == 0) arm(z, 0, pr);
    else if (z == 0) arm(xarm, 2, pr);
    else {
      arm(z, 0, 0.5 * pr);
      arm(xarm, 2, 0.5 * pr);
    }
  }
  return out;
}

}  // namespace

StatisticsTable simulate_decoy_tables(const ChannelScenario& s) {
  if (s.protocol != Protocol::decoy) throw std::invalid_argument("simulate_decoy_tables: not a decoy scenario");
  s.validate();
  StatisticsTable out{Protocol::decoy, s.intensities, {}};
  for (double mu : s.intensities) {
    Eigen::MatrixXd t(4, 5);
    for (int x = 0; x < 4; ++x) {
      const auto frac = detector_fractions(x, s.theta);
      std::array<double, 4> click{};
      for (int d = 0; d < 4; ++d) click[d] = -std::expm1(-mu * s.eta * frac[d]);
      const auto pr = resolve_clicks(click);
      for (int y = 0; y < 5; ++y) t(x, y) = 0.25 * pr[y];
    }
    out.blocks.push_back(t);
  }
  return apply_replacement(std::move(out), s.lambda_rep);
}

StatisticsTable single_photon_truth(const ChannelScenario& s) {
  if (s.protocol != Protocol::decoy) throw std::invalid_argument("single_photon_truth: not a decoy scenario");
  s.validate();
  Eigen::MatrixXd t(4, 5);
  for (int x = 0; x < 4; ++x) {
    const auto frac = detector_fractions(x, s.theta);
    for (int y = 0; y < 4; ++y) t(x, y) = 0.25 * s.eta * frac[y];
    t(x, kNoClick) = 0.25 * (1.0 - s.eta);
  }
  StatisticsTable out{Protocol::decoy, {}, {t}};
  return apply_replacement(std::move(out), s.lambda_rep);
}

}  // namespace cascadeqkd
