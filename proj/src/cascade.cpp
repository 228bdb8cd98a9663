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

#include "cascadeqkd/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace cascadeqkd {

namespace {

double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::uint8_t parity_over(const Bits& b, const std::vector<int>& idx) {
  std::uint8_t v = 0;
  for (int i : idx) v ^= b[i];
  return v;
}

// Both parties' view of one error-correction session.
class Session {
 public:
  Session(const Bits& x, const Bits& y) : x_(x), y_(y), flips_(x.size(), 0) {}

  // One parity exchange over `idx`; returns whether Alice's parity differs
  // from Bob's corrected parity.
  bool exchange(int pass, int block, const std::vector<int>& idx) {
    const std::uint8_t pa = parity_over(x_, idx);
    const std::uint8_t pb = parity_over(y_, idx);
    messages.push_back({Direction::a_to_b, pass, block, idx, pa});
    messages.push_back({Direction::b_to_a, pass, block, idx, pb});
    ++bits_a;
    ++bits_b;
    return (pa ^ pb ^ parity_over(flips_, idx)) != 0;
  }

  // Bisects an index list with odd parity difference.
  int binary(int pass, int block, std::vector<int> cur) {
    if (cur.size() == 1) {
      exchange(pass, block, cur);
      return cur.front();
    }
    while (cur.size() > 1) {
      const std::size_t half = cur.size() / 2;
      std::vector<int> first(cur.begin(), cur.begin() + half);
      if (exchange(pass, block, first)) {
        cur = std::move(first);
      } else {
        cur.erase(cur.begin(), cur.begin() + half);
      }
    }
    return cur.front();
  }

  void flip(int idx) { flips_[idx] ^= 1; }
  std::uint8_t current(int idx) const { return y_[idx] ^ flips_[idx]; }

  const Bits& x_;
  const Bits& y_;
  Bits flips_;
  std::vector<ParityMessage> messages;
  std::int64_t bits_a = 0;
  std::int64_t bits_b = 0;
};

}  // namespace

CascadeParams CascadeParams::resolved() const {
  CascadeParams p = *this;
  if (p.n < 2) throw std::invalid_argument("cascade: n must be at least 2");
  if (!(p.e > 0.0 && p.e < 0.5)) throw std::invalid_argument("cascade: e must lie in (0, 0.5)");
  if (p.passes < 1) throw std::invalid_argument("cascade: passes must be at least 1");
  if (p.growth < 1) throw std::invalid_argument("cascade: growth must be at least 1");
  if (p.k1 == 0) p.k1 = static_cast<int>(std::ceil(0.73 / p.e));
  if (p.k1 < 2) throw std::invalid_argument("cascade: k1 must be at least 2");
  p.k1 = std::min(p.k1, p.n);
  return p;
}

std::vector<ParityMessage> CascadeTranscript::from(Direction d) const {
  std::vector<ParityMessage> out;
  for (const auto& m : messages) {
    if (m.dir == d) out.push_back(m);
  }
  return out;
}

BinaryResult run_binary(const Bits& xa, const Bits& xb, int offset) {
  if (xa.size() != xb.size() || xa.empty()) throw ContractError("run_binary: blocks must be nonempty and equal length");
  int diff = 0;
  for (std::size_t i = 0; i < xa.size(); ++i) diff += xa[i] != xb[i];
  if (diff % 2 == 0) throw ContractError("run_binary: blocks differ in an even number of positions");
  std::vector<int> idx(xa.size());
  std::iota(idx.begin(), idx.end(), 0);
  Session s(xa, xb);
  BinaryResult r;
  r.error_index = s.binary(0, 0, idx) + offset;
  r.messages = std::move(s.messages);
  for (auto& m : r.messages) {
    for (int& i : m.indices) i += offset;
  }
  return r;
}

CascadeTranscript run_cascade(const Bits& x, const Bits& y, const CascadeParams& params) {
  if (x.size() != y.size()) throw std::invalid_argument("run_cascade: strings differ in length");
  CascadeParams p = params;
  if (p.n == 0) p.n = static_cast<int>(x.size());
  if (p.n != static_cast<int>(x.size())) throw std::invalid_argument("run_cascade: n does not match string length");
  p = p.resolved();
  const int n = p.n;

  CascadeTranscript t;
  t.n = n;
  Session s(x, y);
  std::mt19937_64 rng(p.rng_seed);

  std::vector<std::vector<std::vector<int>>> blocks;  // [pass][block] -> sorted indices
  std::vector<std::vector<int>> block_of;             // [pass][index]
  std::vector<std::vector<std::uint8_t>> odd;         // parity difference per block
  std::vector<int> processed;                         // blocks exchanged in the current pass

  auto true_parity = [&](const std::vector<int>& idx) {
    std::uint8_t v = 0;
    for (int i : idx) v ^= x[i] ^ s.current(i);
    return v;
  };

  long long k = p.k1;
  for (int pass = 0; pass < p.passes; ++pass) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (pass > 0) std::shuffle(order.begin(), order.end(), rng);
    const int size = static_cast<int>(std::min<long long>(k, n));
    k *= p.growth;
    auto& pb = blocks.emplace_back();
    auto& owner = block_of.emplace_back(n);
    for (int start = 0; start < n; start += size) {
      std::vector<int> idx(order.begin() + start, order.begin() + std::min(n, start + size));
      std::sort(idx.begin(), idx.end());
      for (int i : idx) owner[i] = static_cast<int>(pb.size());
      pb.push_back(std::move(idx));
    }
    auto& od = odd.emplace_back(pb.size());
    for (std::size_t b = 0; b < pb.size(); ++b) od[b] = true_parity(pb[b]);

    const int nblocks = static_cast<int>(pb.size());
    for (int j = 0; j < nblocks; ++j) {
      const bool mismatch = s.exchange(pass + 1, j, blocks[pass][j]);
      if (!mismatch) continue;
      // Odd blocks ordered by size; a block is visible once its top-level
      // parity has been exchanged.
      std::set<std::tuple<std::size_t, int, int>> queue;
      queue.insert({blocks[pass][j].size(), pass, j});
      while (!queue.empty()) {
        const auto [sz, qp, qb] = *queue.begin();
        queue.erase(queue.begin());
        const std::vector<int>& idx = blocks[qp][qb];
        int err;
        if (idx.size() == 1) {
          // The block parity already located the error.
          err = idx.front();
        } else {
          err = s.binary(qp + 1, qb, idx);
          ++t.binary_calls;
        }
        s.flip(err);
        ++t.corrections;
        for (int op = 0; op <= pass; ++op) {
          const int b = block_of[op][err];
          odd[op][b] ^= 1;
          const bool visible = op < pass || b <= j;
          if (!visible) continue;
          const std::tuple<std::size_t, int, int> key{blocks[op][b].size(), op, b};
          if (odd[op][b]) {
            queue.insert(key);
          } else {
            queue.erase(key);
          }
        }
      }
    }
    for (int op = 0; op <= pass; ++op) {
      for (const auto& idx : blocks[op]) {
        if (true_parity(idx) != 0) t.pass_invariant_ok = false;
      }
    }
  }

  t.messages = std::move(s.messages);
  t.bits_a_to_b = s.bits_a;
  t.bits_b_to_a = s.bits_b;
  t.corrected.resize(n);
  for (int i = 0; i < n; ++i) {
    t.corrected[i] = s.current(i);
    t.residual_errors += t.corrected[i] != x[i];
  }
  return t;
}

std::vector<ParityMessage> reconstruct_bob_messages(const std::vector<ParityMessage>& alice_msgs, const Bits& w) {
  std::vector<ParityMessage> out;
  out.reserve(alice_msgs.size());
  for (const auto& m : alice_msgs) {
    ParityMessage b = m;
    b.dir = Direction::b_to_a;
    for (int i : m.indices) {
      if (i < 0 || i >= static_cast<int>(w.size())) throw std::out_of_range("reconstruct_bob_messages: index out of range");
      b.parity ^= w[i];
    }
    out.push_back(std::move(b));
  }
  return out;
}

LeakageSummary leakage_summary(const CascadeTranscript& t, double e) {
  if (e < 0.0 || e > 0.5) throw std::invalid_argument("leakage_summary: e must lie in [0, 0.5]");
  if (t.n <= 0) throw std::invalid_argument("leakage_summary: empty transcript");
  LeakageSummary s;
  s.delta_a = static_cast<double>(t.bits_a_to_b) / t.n;
  s.delta_b = static_cast<double>(t.bits_b_to_a) / t.n;
  const double h = h2(e);
  if (h <= 0.0) {
    s.f_defined = false;
    s.f_emp = std::nan("");
  } else {
    s.f_emp = s.delta_a / h;
  }
  return s;
}

bool transcript_paired(const CascadeTranscript& t) {
  if (t.messages.size() % 2 != 0) return false;
  std::int64_t a = 0, b = 0;
  for (std::size_t i = 0; i < t.messages.size(); i += 2) {
    const auto& ma = t.messages[i];
    const auto& mb = t.messages[i + 1];
    if (ma.dir != Direction::a_to_b || mb.dir != Direction::b_to_a) return false;
    if (ma.pass != mb.pass || ma.block != mb.block || ma.indices != mb.indices) return false;
    ++a;
    ++b;
  }
  return a == t.bits_a_to_b && b == t.bits_b_to_a;
}

std::string hex_ranges(const std::vector<int>& idx) {
  std::ostringstream os;
  os << std::hex;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && idx[j + 1] == idx[j] + 1) ++j;
    if (i > 0) os << ';';
    os << idx[i];
    if (j > i) os << '-' << idx[j];
    i = j + 1;
  }
  return os.str();
}

std::string export_transcript(const CascadeTranscript& t) {
  std::ostringstream os;
  for (const auto& m : t.messages) {
    os << (m.dir == Direction::a_to_b ? "A>B" : "B>A") << ',' << m.pass << ',' << m.block << ','
       << hex_ranges(m.indices) << ',' << int(m.parity) << '\n';
  }
  return os.str();
}

std::pair<Bits, Bits> sample_strings(int n, double e, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_strings: n must be positive");
  if (e < 0.0 || e > 0.5) throw std::invalid_argument("sample_strings: e must lie in [0, 0.5]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution noise(e);
  Bits x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = static_cast<std::uint8_t>(rng() & 1u);
    y[i] = x[i] ^ static_cast<std::uint8_t>(noise(rng));
  }
  return {x, y};
}

Bits xor_bits(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw std::invalid_argument("xor_bits: length mismatch");
  Bits w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) w[i] = a[i] ^ b[i];
  return w;
}

}  // namespace cascadeqkd
