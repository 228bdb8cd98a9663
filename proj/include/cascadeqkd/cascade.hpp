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

// Simulation of the Cascade error-correction protocol with full two-way
// parity transcripts.
//
// Bob announces parities of his received string. Corrections he has made are
// public (they follow from the transcript), so both sides compare Alice's
// parity against Bob's parity adjusted by the corrections inside the block.
// With this convention every Bob parity satisfies
//   P_B = P_A xor (xor of w_l over the same index set),   w = x xor y.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cascadeqkd {

using Bits = std::vector<std::uint8_t>;

struct CascadeParams {
  int n = 0;
  double e = 0.05;
  int k1 = 0;  // 0 selects ceil(0.73 / e) clamped to [2, n]
  int growth = 2;
  int passes = 4;
  std::uint64_t rng_seed = 1;

  /// Fills k1 and throws std::invalid_argument on invalid fields.
  CascadeParams resolved() const;
};

enum class Direction { a_to_b, b_to_a };

struct ParityMessage {
  Direction dir = Direction::a_to_b;
  int pass = 0;   // 1-based
  int block = 0;  // block id within the pass
  std::vector<int> indices;  // sorted
  std::uint8_t parity = 0;

  bool operator==(const ParityMessage&) const = default;
};

struct CascadeTranscript {
  int n = 0;
  std::vector<ParityMessage> messages;
  Bits corrected;  // Bob's string after correction
  std::int64_t bits_a_to_b = 0;
  std::int64_t bits_b_to_a = 0;
  int binary_calls = 0;
  int corrections = 0;
  int residual_errors = 0;
  /// Direct recount after every pass: all blocks formed so far have even
  /// parity difference.
  bool pass_invariant_ok = true;

  std::vector<ParityMessage> from(Direction d) const;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct BinaryResult {
  int error_index = -1;
  std::vector<ParityMessage> messages;
};

/// Bisection on blocks `xa` and `xb` that differ in an odd number of
/// positions. Indices in the result are offset by `offset`. A block of length
/// one costs a single exchange. Throws ContractError on even difference.
BinaryResult run_binary(const Bits& xa, const Bits& xb, int offset = 0);

CascadeTranscript run_cascade(const Bits& x, const Bits& y, const CascadeParams& p);

/// Bob's messages from Alice's messages and the error string.
std::vector<ParityMessage> reconstruct_bob_messages(const std::vector<ParityMessage>& alice_msgs, const Bits& w);

struct LeakageSummary {
  double delta_a = 0.0;
  double delta_b = 0.0;
  double f_emp = 0.0;
  bool f_defined = true;
};

LeakageSummary leakage_summary(const CascadeTranscript& t, double e);

/// Pairs every A->B message with a B->A message over identical metadata.
bool transcript_paired(const CascadeTranscript& t);

/// Sorted indices as hex ranges joined by ';', e.g. "0-1f;40".
std::string hex_ranges(const std::vector<int>& sorted_indices);

/// One line per message: dir,pass,block,indices,parity.
std::string export_transcript(const CascadeTranscript& t);

/// Random x and y = x xor Bernoulli(e) noise from one seed.
std::pair<Bits, Bits> sample_strings(int n, double e, std::uint64_t seed);

Bits xor_bits(const Bits& a, const Bits& b);

}  // namespace cascadeqkd
