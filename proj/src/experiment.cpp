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

#include "cascadeqkd/experiment.hpp"

#include "cascadeqkd/decoy.hpp"
#include "cascadeqkd/protocol.hpp"
#include "cascadeqkd/symmetry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace cascadeqkd {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// --- config parsing helpers ------------------------------------------------

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + "." + it.key() + ": unknown field");
  }
}

double get_number(const json& j, const std::string& where, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& where, const char* key, int def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return j[key].get<int>();
}

std::vector<double> get_numbers(const json& j, const std::string& where, const char* key, std::vector<double> def) {
  if (!j.contains(key)) return def;
  const json& a = j[key];
  if (!a.is_array() || a.empty()) throw ConfigError(where + "." + key + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a non-empty array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

// --- formatting ------------------------------------------------------------

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// --- scenario evaluation ---------------------------------------------------

struct Job {
  std::string scenario;
  std::string column;
  Graining graining;
  double sweep_value;
  ChannelScenario channel;
};

SolveResult scale_result(SolveResult r, double factor, double offset) {
  r.lower = factor * r.lower + offset;
  r.upper = factor * r.upper + offset;
  r.gap = r.upper - r.lower;
  return r;
}

PointResult evaluate(const Job& job, const ScenarioConfig& cfg) {
  PointResult out;
  out.scenario = job.scenario;
  out.column = job.column;
  out.graining = job.graining;
  out.sweep_value = job.sweep_value;
  const ChannelScenario& ch = job.channel;
  if (ch.protocol == Protocol::qubit) {
    const StatisticsTable t = simulate_qubit_table(ch);
    const auto cons = build_constraints(t, job.graining, Protocol::qubit, ConstraintMode::equality);
    out.cmp = compare(build_qubit_maps(false), build_qubit_maps(true), cons, cfg.solver);
    const SiftedStats st = sifted_stats(t.blocks.at(0));
    out.report = assemble_keyrates(out.cmp.f, out.cmp.f_prime, st.e, cfg.f_eff, st.p_pass);
  } else {
    const StatisticsTable t = simulate_decoy_tables(ch);
    const YieldBounds yb = solve_yield_bounds(t, PhotonCutoff{cfg.photon_cutoff});
    const auto cons = [&] {
      auto c = assemble_interval_constraints(yb, job.graining);
      for (auto& s : source_replacement_constraints(Protocol::decoy)) c.push_back(std::move(s));
      return c;
    }();
    out.cmp = compare(build_decoy_maps(false), build_decoy_maps(true), cons, cfg.solver);
    const SiftedStats st = sifted_stats(t.blocks.at(0));
    // The channel model has no dark counts, so vacuum pulses never pass.
    constexpr double kPass0 = 0.0;
    const double mu = ch.intensities.front();
    const PhotonSplitRates lo = photon_split_keyrate(std::max(0.0, out.cmp.f.lower),
                                                     std::max(0.0, out.cmp.f_prime.lower), kPass0, mu);
    const double p1 = poisson_weight(mu, 1);
    const SolveResult f_total = scale_result(out.cmp.f, p1, lo.zero_photon_f);
    const SolveResult fp_total = scale_result(out.cmp.f_prime, p1, lo.zero_photon_f_prime);
    out.report = assemble_keyrates(f_total, fp_total, st.e, cfg.f_eff, st.p_pass);
  }
  return out;
}

std::vector<PointResult> evaluate_all(const std::vector<Job>& jobs, const ScenarioConfig& cfg, int threads) {
  std::vector<PointResult> out(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), threads, [&](int i) { out[i] = evaluate(jobs[i], cfg); });
  return out;
}

std::string scenario_id(Protocol p, Graining g, const std::string& var, double value) {
  std::ostringstream os;
  os << to_string(p) << '/' << to_string(g);
  if (var != "none") os << '/' << var << '=' << fmt(value);
  return os.str();
}

VerdictGrid assemble_grid(std::vector<std::string> columns, const std::vector<Graining>& rows,
                          std::vector<PointResult> points) {
  VerdictGrid g;
  g.columns = std::move(columns);
  g.rows = rows;
  g.cells.assign(rows.size(), std::vector<VerdictKind>(g.columns.size(), VerdictKind::equal));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < g.columns.size(); ++c) {
      std::vector<VerdictKind> v;
      for (const auto& p : points) {
        if (p.graining == rows[r] && p.column == g.columns[c]) v.push_back(p.cmp.verdict.kind);
      }
      g.cells[r][c] = aggregate_verdicts(v);
    }
  }
  g.points = std::move(points);
  return g;
}

int grid_exit_code(const VerdictGrid& g) {
  for (const auto& row : g.cells) {
    for (VerdictKind v : row) {
      if (v == VerdictKind::inconclusive) return 3;
    }
  }
  return 0;
}

std::string grid_text(const VerdictGrid& g) {
  std::ostringstream os;
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    os << to_string(g.rows[r]);
    for (VerdictKind v : g.cells[r]) os << ' ' << verdict_symbol(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace

// --- configuration ---------------------------------------------------------

std::vector<double> SweepSpec::values() const {
  if (variable == "none") return {start};
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) out.push_back(start + i * step);
  return out;
}

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig cfg;
  check_keys(j, "config",
             {"protocol", "channel", "grainings", "sweep", "solver", "keyrate", "decoy_bounds", "table2", "table4",
              "cascade"});
  if (j.contains("protocol")) {
    if (!j["protocol"].is_string()) throw ConfigError("config.protocol: expected a string");
    try {
      cfg.protocol = parse_protocol(j["protocol"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.protocol: ") + e.what());
    }
  }
  cfg.channel.protocol = cfg.protocol;
  if (cfg.protocol == Protocol::decoy) cfg.channel.intensities = {0.5, 0.1, 0.001};
  if (j.contains("channel")) {
    const json& c = j["channel"];
    check_keys(c, "channel", {"theta_deg", "q", "lambda_rep", "eta", "intensities"});
    cfg.channel.theta = get_number(c, "channel", "theta_deg", 0.0) * kDeg;
    cfg.channel.q = get_number(c, "channel", "q", 0.0);
    cfg.channel.lambda_rep = get_number(c, "channel", "lambda_rep", 0.0);
    cfg.channel.eta = get_number(c, "channel", "eta", 1.0);
    cfg.channel.intensities = get_numbers(c, "channel", "intensities", cfg.channel.intensities);
  }
  if (cfg.protocol == Protocol::qubit) {
    require(cfg.channel.eta == 1.0, "channel.eta", "loss applies to the decoy protocol only");
  } else {
    require(cfg.channel.q == 0.0, "channel.q", "depolarization applies to the qubit protocol only");
  }
  try {
    cfg.channel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("channel: ") + e.what());
  }
  if (j.contains("grainings")) {
    const json& g = j["grainings"];
    require(g.is_array() && !g.empty(), "config.grainings", "expected a non-empty array");
    cfg.grainings.clear();
    for (const auto& v : g) {
      require(v.is_string(), "config.grainings", "expected strings");
      try {
        cfg.grainings.push_back(parse_graining(v.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.grainings: ") + e.what());
      }
    }
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep", {"variable", "start", "stop", "step"});
    if (s.contains("variable")) {
      require(s["variable"].is_string(), "sweep.variable", "expected a string");
      cfg.sweep.variable = s["variable"].get<std::string>();
    }
    const std::string& v = cfg.sweep.variable;
    require(v == "none" || v == "theta_deg" || v == "q" || v == "eta", "sweep.variable",
            "must be one of none, theta_deg, q, eta");
    require(!(v == "q" && cfg.protocol == Protocol::decoy), "sweep.variable", "q sweeps need the qubit protocol");
    require(!(v == "eta" && cfg.protocol == Protocol::qubit), "sweep.variable", "eta sweeps need the decoy protocol");
    cfg.sweep.start = get_number(s, "sweep", "start", 0.0);
    cfg.sweep.stop = get_number(s, "sweep", "stop", cfg.sweep.start);
    cfg.sweep.step = get_number(s, "sweep", "step", 1.0);
    require(cfg.sweep.step > 0.0, "sweep.step", "must be positive");
    require(cfg.sweep.stop >= cfg.sweep.start, "sweep.stop", "must not be below sweep.start");
    if (v == "q" || v == "eta") {
      require(cfg.sweep.start >= 0.0 && cfg.sweep.stop <= 1.0, "sweep", "range must lie in [0, 1]");
    }
    if (v == "eta") require(cfg.sweep.start > 0.0, "sweep.start", "eta must be positive");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver", {"gap_target", "max_iters", "clip"});
    cfg.solver.gap_target = get_number(s, "solver", "gap_target", cfg.solver.gap_target);
    cfg.solver.max_iters = get_int(s, "solver", "max_iters", cfg.solver.max_iters);
    cfg.solver.clip = get_number(s, "solver", "clip", cfg.solver.clip);
    require(cfg.solver.gap_target > 0.0, "solver.gap_target", "must be positive");
    require(cfg.solver.max_iters >= 1, "solver.max_iters", "must be at least 1");
    require(cfg.solver.clip > 0.0 && cfg.solver.clip < 1e-3, "solver.clip", "must lie in (0, 1e-3)");
  }
  if (j.contains("keyrate")) {
    const json& k = j["keyrate"];
    check_keys(k, "keyrate", {"f_eff"});
    cfg.f_eff = get_number(k, "keyrate", "f_eff", cfg.f_eff);
    require(cfg.f_eff >= 1.0, "keyrate.f_eff", "must be at least 1");
  }
  if (j.contains("decoy_bounds")) {
    const json& d = j["decoy_bounds"];
    check_keys(d, "decoy_bounds", {"photon_cutoff"});
    cfg.photon_cutoff = get_int(d, "decoy_bounds", "photon_cutoff", cfg.photon_cutoff);
    require(cfg.photon_cutoff >= 1 && cfg.photon_cutoff <= 60, "decoy_bounds.photon_cutoff", "must lie in [1, 60]");
  }
  if (j.contains("table2")) {
    const json& t = j["table2"];
    check_keys(t, "table2", {"theta_deg", "q", "lambda_rep"});
    cfg.table2.theta_deg = get_numbers(t, "table2", "theta_deg", cfg.table2.theta_deg);
    cfg.table2.q = get_number(t, "table2", "q", cfg.table2.q);
    cfg.table2.lambda_rep = get_number(t, "table2", "lambda_rep", cfg.table2.lambda_rep);
    require(cfg.table2.q > 0.0 && cfg.table2.q <= 1.0, "table2.q", "must lie in (0, 1]");
    require(cfg.table2.lambda_rep > 0.0 && cfg.table2.lambda_rep <= 1.0, "table2.lambda_rep", "must lie in (0, 1]");
    for (double th : cfg.table2.theta_deg) require(th != 0.0, "table2.theta_deg", "misalignment angles must be nonzero");
  }
  if (j.contains("table4")) {
    const json& t = j["table4"];
    check_keys(t, "table4", {"eta", "sin2_theta", "intensities", "lambda_rep"});
    cfg.table4.eta = get_numbers(t, "table4", "eta", cfg.table4.eta);
    cfg.table4.sin2_theta = get_number(t, "table4", "sin2_theta", cfg.table4.sin2_theta);
    cfg.table4.intensities = get_numbers(t, "table4", "intensities", cfg.table4.intensities);
    cfg.table4.lambda_rep = get_number(t, "table4", "lambda_rep", cfg.table4.lambda_rep);
    for (double e : cfg.table4.eta) require(e > 0.0 && e < 1.0, "table4.eta", "loss columns need eta in (0, 1)");
    require(cfg.table4.sin2_theta > 0.0 && cfg.table4.sin2_theta < 1.0, "table4.sin2_theta", "must lie in (0, 1)");
    require(cfg.table4.lambda_rep > 0.0 && cfg.table4.lambda_rep <= 1.0, "table4.lambda_rep", "must lie in (0, 1]");
    ChannelScenario probe;
    probe.protocol = Protocol::decoy;
    probe.intensities = cfg.table4.intensities;
    try {
      probe.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("table4.intensities: ") + e.what());
    }
  }
  if (j.contains("cascade")) {
    const json& c = j["cascade"];
    check_keys(c, "cascade", {"n", "e", "seeds", "seed", "k1", "passes", "growth"});
    cfg.cascade.n = get_int(c, "cascade", "n", cfg.cascade.n);
    cfg.cascade.e = get_numbers(c, "cascade", "e", cfg.cascade.e);
    cfg.cascade.seeds = get_int(c, "cascade", "seeds", cfg.cascade.seeds);
    if (c.contains("seed")) {
      require(c["seed"].is_number_unsigned() || c["seed"].is_number_integer(), "cascade.seed", "expected an integer");
      cfg.cascade.seed = c["seed"].get<std::uint64_t>();
    }
    cfg.cascade.k1 = get_int(c, "cascade", "k1", cfg.cascade.k1);
    cfg.cascade.passes = get_int(c, "cascade", "passes", cfg.cascade.passes);
    cfg.cascade.growth = get_int(c, "cascade", "growth", cfg.cascade.growth);
    require(cfg.cascade.n >= 2, "cascade.n", "must be at least 2");
    require(cfg.cascade.seeds >= 1, "cascade.seeds", "must be at least 1");
    require(cfg.cascade.k1 == 0 || cfg.cascade.k1 >= 2, "cascade.k1", "must be 0 (automatic) or at least 2");
    require(cfg.cascade.passes >= 1, "cascade.passes", "must be at least 1");
    require(cfg.cascade.growth >= 1, "cascade.growth", "must be at least 1");
    for (double e : cfg.cascade.e) require(e > 0.0 && e < 0.5, "cascade.e", "values must lie in (0, 0.5)");
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + std::count(text.begin(), text.begin() + (pos ? pos - 1 : 0), '\n');
    const std::size_t line_start = text.rfind('\n', pos ? pos - 1 : 0);
    const std::size_t col = pos - (line_start == std::string::npos ? 0 : line_start + 1);
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
  return parse_config(j);
}

// --- utilities -------------------------------------------------------------

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  const int threads = std::max(1, std::min(jobs, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

SiftedStats sifted_stats(const Eigen::MatrixXd& joint) {
  double errors = 0.0, gain_z = 0.0, gain = 0.0;
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 4; ++y) {
      if (x / 2 != y / 2) continue;
      gain += joint(x, y);
      if (x / 2 == 0) {
        gain_z += joint(x, y);
        if (x != y) errors += joint(x, y);
      }
    }
  }
  SiftedStats s;
  s.p_pass = gain;
  s.e = gain_z > 0.0 ? std::min(0.5, errors / gain_z) : 0.0;
  return s;
}

VerdictKind aggregate_verdicts(const std::vector<VerdictKind>& v) {
  if (v.empty()) return VerdictKind::inconclusive;
  bool greater = false;
  for (VerdictKind k : v) {
    if (k == VerdictKind::inconclusive) return VerdictKind::inconclusive;
    greater = greater || k == VerdictKind::strictly_greater;
  }
  return greater ? VerdictKind::strictly_greater : VerdictKind::equal;
}

std::string grid_to_csv(const VerdictGrid& g) {
  std::ostringstream os;
  os << "graining";
  for (const auto& c : g.columns) os << ',' << c;
  os << '\n';
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    os << to_string(g.rows[r]);
    for (VerdictKind v : g.cells[r]) os << ',' << verdict_symbol(v);
    os << '\n';
  }
  return os.str();
}

std::string points_to_csv(const std::vector<PointResult>& pts) {
  std::ostringstream os;
  os << "scenario,column,graining,sweep_value,F_low,F_up,Fp_low,Fp_up,verdict,margin,F_status,Fp_status\n";
  for (const auto& p : pts) {
    os << p.scenario << ',' << p.column << ',' << to_string(p.graining) << ',' << fmt(p.sweep_value) << ','
       << fmt(p.cmp.f.lower) << ',' << fmt(p.cmp.f.upper) << ',' << fmt(p.cmp.f_prime.lower) << ','
       << fmt(p.cmp.f_prime.upper) << ',' << verdict_symbol(p.cmp.verdict.kind) << ',' << fmt(p.cmp.verdict.margin)
       << ',' << to_string(p.cmp.f.status) << ',' << to_string(p.cmp.f_prime.status) << '\n';
  }
  return os.str();
}

// --- verdict grids ---------------------------------------------------------

VerdictGrid qubit_verdict_grid(const ScenarioConfig& cfg, int jobs) {
  const std::vector<std::string> columns{"misalignment", "depolarization", "misalignment+depolarization",
                                         "misalignment+depolarization+replace"};
  std::vector<Job> list;
  for (Graining g : cfg.grainings) {
    for (const auto& col : columns) {
      const bool mis = col != "depolarization";
      const bool dep = col != "misalignment";
      const bool rep = col == columns[3];
      const std::vector<double> thetas = mis ? cfg.table2.theta_deg : std::vector<double>{0.0};
      for (double th : thetas) {
        Job job;
        job.column = col;
        job.graining = g;
        job.sweep_value = th;
        job.channel.protocol = Protocol::qubit;
        job.channel.theta = th * kDeg;
        job.channel.q = dep ? cfg.table2.q : 0.0;
        job.channel.lambda_rep = rep ? cfg.table2.lambda_rep : 0.0;
        job.scenario = "qubit/" + std::string(to_string(g)) + "/" + col + "/theta_deg=" + fmt(th);
        list.push_back(std::move(job));
      }
    }
  }
  return assemble_grid(columns, cfg.grainings, evaluate_all(list, cfg, jobs));
}

VerdictGrid decoy_verdict_grid(const ScenarioConfig& cfg, int jobs) {
  const std::vector<std::string> columns{"loss", "misalignment", "loss+misalignment", "loss+misalignment+replace"};
  const double theta = std::asin(std::sqrt(cfg.table4.sin2_theta));
  std::vector<Job> list;
  for (Graining g : cfg.grainings) {
    for (const auto& col : columns) {
      const bool loss = col != "misalignment";
      const bool mis = col != "loss";
      const bool rep = col == columns[3];
      const std::vector<double> etas = loss ? cfg.table4.eta : std::vector<double>{1.0};
      for (double eta : etas) {
        Job job;
        job.column = col;
        job.graining = g;
        job.sweep_value = eta;
        job.channel.protocol = Protocol::decoy;
        job.channel.intensities = cfg.table4.intensities;
        job.channel.eta = eta;
        job.channel.theta = mis ? theta : 0.0;
        job.channel.lambda_rep = rep ? cfg.table4.lambda_rep : 0.0;
        job.scenario = "decoy/" + std::string(to_string(g)) + "/" + col + "/eta=" + fmt(eta);
        list.push_back(std::move(job));
      }
    }
  }
  return assemble_grid(columns, cfg.grainings, evaluate_all(list, cfg, jobs));
}

// --- commands --------------------------------------------------------------

CommandOutput cmd_keyrate(const ScenarioConfig& cfg, int jobs) {
  std::vector<Job> list;
  for (Graining g : cfg.grainings) {
    for (double v : cfg.sweep.values()) {
      Job job;
      job.graining = g;
      job.sweep_value = v;
      job.channel = cfg.channel;
      if (cfg.sweep.variable == "theta_deg") job.channel.theta = v * kDeg;
      if (cfg.sweep.variable == "q") job.channel.q = v;
      if (cfg.sweep.variable == "eta") job.channel.eta = v;
      job.scenario = scenario_id(cfg.protocol, g, cfg.sweep.variable, v);
      job.column = "keyrate";
      list.push_back(std::move(job));
    }
  }
  const auto pts = evaluate_all(list, cfg, jobs);
  CommandOutput out;
  std::ostringstream csv;
  csv << keyrate_csv_header() << ",protocol,graining,sweep_variable,sweep_value,e,p_pass,f_eff,clamped,F_status,Fp_status\n";
  int inconclusive = 0;
  for (const auto& p : pts) {
    csv << keyrate_csv_row(p.scenario, p.report, p.cmp.verdict) << ',' << to_string(cfg.protocol) << ','
        << to_string(p.graining) << ',' << cfg.sweep.variable << ',' << fmt(p.sweep_value) << ',' << fmt(p.report.e)
        << ',' << fmt(p.report.p_pass) << ',' << fmt(p.report.f_eff) << ',' << (p.report.clamped ? 1 : 0) << ','
        << to_string(p.cmp.f.status) << ',' << to_string(p.cmp.f_prime.status) << '\n';
    inconclusive += p.cmp.verdict.kind == VerdictKind::inconclusive;
  }
  out.files.emplace_back("keyrate.csv", csv.str());
  out.summary = std::to_string(pts.size()) + " points, " + std::to_string(inconclusive) + " inconclusive\n";
  out.exit_code = inconclusive ? 3 : 0;
  return out;
}

CommandOutput cmd_table2(const ScenarioConfig& cfg, int jobs) {
  const VerdictGrid g = qubit_verdict_grid(cfg, jobs);
  CommandOutput out;
  out.files.emplace_back("table2_grid.csv", grid_to_csv(g));
  out.files.emplace_back("table2_points.csv", points_to_csv(g.points));
  out.summary = grid_text(g);
  out.exit_code = grid_exit_code(g);
  return out;
}

CommandOutput cmd_table4(const ScenarioConfig& cfg, int jobs) {
  const VerdictGrid g = decoy_verdict_grid(cfg, jobs);
  CommandOutput out;
  out.files.emplace_back("table4_grid.csv", grid_to_csv(g));
  out.files.emplace_back("table4_points.csv", points_to_csv(g.points));
  out.summary = grid_text(g);
  out.exit_code = grid_exit_code(g);
  return out;
}

CommandOutput cmd_cascade(const ScenarioConfig& cfg, int jobs) {
  const CascadeConfig& cc = cfg.cascade;
  struct Row {
    std::uint64_t seed;
    double e;
    LeakageSummary leak;
    int residual;
    bool reconstructed;
    bool paired;
    bool invariant;
  };
  const int per_e = cc.seeds;
  const int total = per_e * static_cast<int>(cc.e.size());
  std::vector<Row> rows(total);
  parallel_for(total, jobs, [&](int i) {
    const int ei = i / per_e;
    const std::uint64_t seed = cc.seed + static_cast<std::uint64_t>(i % per_e);
    const double e = cc.e[ei];
    const auto [x, y] = sample_strings(cc.n, e, splitmix64(seed ^ (static_cast<std::uint64_t>(ei) << 40)));
    CascadeParams p;
    p.n = cc.n;
    p.e = e;
    p.k1 = cc.k1;
    p.passes = cc.passes;
    p.growth = cc.growth;
    p.rng_seed = seed;
    const CascadeTranscript t = run_cascade(x, y, p);
    const Bits w = xor_bits(x, y);
    Row r{seed, e, leakage_summary(t, e), t.residual_errors, false, transcript_paired(t), t.pass_invariant_ok};
    r.reconstructed = reconstruct_bob_messages(t.from(Direction::a_to_b), w) == t.from(Direction::b_to_a);
    rows[i] = r;
  });
  std::ostringstream csv, med;
  csv << "seed,n,e,deltaA,deltaB,f_emp,residual_errors,reconstruction_ok\n";
  med << "e,median_f_emp,success_fraction,all_reconstructed,all_delta_equal\n";
  bool ok = true;
  for (std::size_t ei = 0; ei < cc.e.size(); ++ei) {
    std::vector<double> f;
    int success = 0;
    bool rec = true, equal = true;
    for (int k = 0; k < per_e; ++k) {
      const Row& r = rows[ei * per_e + k];
      csv << r.seed << ',' << cc.n << ',' << fmt(r.e) << ',' << fmt(r.leak.delta_a) << ',' << fmt(r.leak.delta_b) << ','
          << fmt(r.leak.f_emp) << ',' << r.residual << ',' << (r.reconstructed ? 1 : 0) << '\n';
      f.push_back(r.leak.f_emp);
      success += r.residual == 0;
      rec = rec && r.reconstructed && r.paired && r.invariant;
      equal = equal && r.leak.delta_a == r.leak.delta_b;
    }
    ok = ok && rec && equal;
    med << fmt(cc.e[ei]) << ',' << fmt(median(f)) << ',' << fmt(static_cast<double>(success) / per_e) << ','
        << (rec ? 1 : 0) << ',' << (equal ? 1 : 0) << '\n';
  }
  CommandOutput out;
  out.files.emplace_back("cascade_runs.csv", csv.str());
  out.files.emplace_back("cascade_summary.csv", med.str());
  out.summary = med.str();
  out.exit_code = ok ? 0 : 1;
  return out;
}

CommandOutput cmd_decoy_bounds(const ScenarioConfig& cfg) {
  if (cfg.protocol != Protocol::decoy) throw ConfigError("config.protocol: decoy-bounds needs the decoy protocol");
  const StatisticsTable t = simulate_decoy_tables(cfg.channel);
  const YieldBounds yb = solve_yield_bounds(t, PhotonCutoff{cfg.photon_cutoff});
  const Eigen::MatrixXd truth = conditional_yields(single_photon_truth(cfg.channel).blocks.at(0));
  std::ostringstream csv;
  csv << "statistic,low,high,truth,gap_low,gap_high,contains\n";
  bool ok = true;
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 5; ++y) {
      const YieldInterval& c = yb.cells[x][y];
      const bool in = c.low <= truth(x, y) + 1e-12 && truth(x, y) <= c.high + 1e-12;
      ok = ok && in && c.gap_low < 1e-9 && c.gap_high < 1e-9;
      csv << cell_label(x, y) << ',' << fmt(c.low) << ',' << fmt(c.high) << ',' << fmt(truth(x, y)) << ','
          << fmt(c.gap_low) << ',' << fmt(c.gap_high) << ',' << (in ? 1 : 0) << '\n';
    }
  }
  CommandOutput out;
  out.files.emplace_back("decoy_bounds.csv", csv.str());
  out.summary = std::string(ok ? "all single-photon yields bracketed" : "bracketing failed") +
                ", max duality gap " + fmt(yb.max_duality_gap()) + "\n";
  out.exit_code = ok ? 0 : 1;
  return out;
}

// --- invariant suite -------------------------------------------------------

double gradient_fd_error(const ProtocolMaps& maps, int points, std::uint64_t seed, bool flip_sign) {
  std::mt19937_64 rng(seed);
  const int bob = maps.in_dims.at(1);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const CMat rho = random_source_state(rng, bob);
    CMat d = random_hermitian(rng, maps.in_dim());
    d /= d.norm();
    const double h = 1e-5;
    const double fd = (objective(CMat(rho + h * d), maps) - objective(CMat(rho - h * d), maps)) / (2.0 * h);
    CMat g = gradient(rho, maps).matrix();
    if (flip_sign) g = -g;
    const double an = hs_inner(g, d);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
  }
  return worst;
}

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };
  std::mt19937_64 rng(seed);

  // Kraus sets are trace non-increasing; a scaled operator breaks this.
  auto completeness_ok = [](const ProtocolMaps& m) {
    return max_eigenvalue(kraus_completeness(m)) <= 1.0 + 1e-12 && min_eigenvalue(kraus_completeness(m)) >= -1e-12;
  };
  {
    bool ok = true;
    for (bool w : {false, true}) ok = ok && completeness_ok(build_qubit_maps(w)) && completeness_ok(build_decoy_maps(w));
    add("kraus_completeness", ok, "sum K^dagger K <= I for all four key maps");
    ProtocolMaps broken = build_qubit_maps(false);
    broken.g_kraus.front() = KrausOperator(3.0 * broken.g_kraus.front().matrix());
    add("mutation_corrupted_kraus_detected", !completeness_ok(broken), "scaled Kraus operator must fail completeness");
  }
  {
    double err = 0.0;
    for (bool w : {false, true}) {
      err = std::max(err, gradient_fd_error(build_qubit_maps(w), 10, seed + 1));
      err = std::max(err, gradient_fd_error(build_decoy_maps(w), 5, seed + 2));
    }
    add("gradient_finite_difference", err < 1e-5, "max relative error " + fmt(err));
    const double flipped = gradient_fd_error(build_qubit_maps(false), 5, seed + 3, true);
    add("mutation_gradient_sign_detected", flipped > 1e-5, "sign-flipped gradient error " + fmt(flipped));
  }
  {
    double err = 0.0;
    for (int k = 0; k < 20; ++k) {
      const CMat rho = random_density(rng, 4);
      const CMat gam = random_hermitian(rng, 4);
      const CMat t = twirl(rho);
      err = std::max(err, max_abs_diff(twirl(t), t));
      err = std::max(err, std::abs(hs_inner(gam, t) - hs_inner(twirl_adjoint(HermitianOperator::hermitian_part(gam)).matrix(), rho)));
      const CMat bell = bell_basis().adjoint() * t * bell_basis();
      err = std::max(err, (bell - CMat(bell.diagonal().asDiagonal())).cwiseAbs().maxCoeff());
    }
    add("twirl_identities", err < 1e-12, "max deviation " + fmt(err));
  }
  {
    double worst = 0.0;
    std::uniform_real_distribution<double> u;
    for (int k = 0; k < 20; ++k) {
      BellDiagonalState s;
      double tot = 0.0;
      for (double& v : s.lambdas) tot += (v = u(rng));
      for (double& v : s.lambdas) v /= tot;
      for (auto b : {MeasureBasis::z, MeasureBasis::x, MeasureBasis::y}) worst = std::max(worst, eve_block_diagonality(s, b));
    }
    add("eve_block_diagonality", worst < 1e-12, "max overlap " + fmt(worst));
  }
  {
    bool ok = true;
    for (int k = 0; k < 20; ++k) {
      const DensityOperator rho(random_source_state(rng));
      ok = ok && twirl_decreases_objective(rho, build_qubit_maps(false)) &&
           twirl_decreases_objective(rho, build_qubit_maps(true));
    }
    add("twirl_decreases_objective", ok, "20 random source-replacement states, f and f'");
  }
  {
    ChannelScenario sc;
    const auto t = simulate_qubit_table(sc);
    bool ok = true;
    std::string detail;
    for (Graining g : {Graining::coarse, Graining::sifted_fine, Graining::fine}) {
      const auto c = compare(build_qubit_maps(false), build_qubit_maps(true),
                             build_constraints(t, g, Protocol::qubit, ConstraintMode::equality));
      ok = ok && c.f.lower >= 0.4999 && c.f.upper <= 0.5001 && c.f_prime.lower >= 0.4999 && c.f_prime.upper <= 0.5001;
      detail += std::string(to_string(g)) + " [" + fmt(c.f.lower) + "," + fmt(c.f.upper) + "] ";
    }
    add("noiseless_baseline", ok, detail);
  }
  {
    ChannelScenario sc;
    sc.q = 0.1;
    const auto t = simulate_qubit_table(sc);
    const SolveResult r = minimize(build_qubit_maps(false), build_constraints(t, Graining::coarse, Protocol::qubit,
                                                                             ConstraintMode::equality));
    const double oracle = bell_minimize(0.05, 0.05).value;
    add("bell_oracle_agreement", r.lower - 1e-3 <= oracle && oracle <= r.upper + 1e-3,
        "solver [" + fmt(r.lower) + "," + fmt(r.upper) + "] oracle " + fmt(oracle));
  }
  {
    bool ok = true;
    double gap = 0.0;
    std::uniform_real_distribution<double> u;
    for (int k = 0; k < 3; ++k) {
      ChannelScenario sc;
      sc.protocol = Protocol::decoy;
      sc.intensities = {0.5, 0.1, 0.001};
      sc.theta = 0.3 * u(rng);
      sc.eta = 0.05 + 0.95 * u(rng);
      const YieldBounds yb = solve_yield_bounds(simulate_decoy_tables(sc), PhotonCutoff{});
      const Eigen::MatrixXd truth = conditional_yields(single_photon_truth(sc).blocks.at(0));
      for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 5; ++y) {
          ok = ok && yb.cells[x][y].low <= truth(x, y) + 1e-12 && truth(x, y) <= yb.cells[x][y].high + 1e-12;
        }
      }
      gap = std::max(gap, yb.max_duality_gap());
    }
    add("decoy_sandwich", ok && gap < 1e-9, "max duality gap " + fmt(gap));
  }
  {
    const PhotonSplitRates r = photon_split_keyrate(0.3, 0.2, 0.01, 0.5);
    add("zero_photon_split", r.zero_photon_f_prime == 0.0 && r.zero_photon_f == poisson_weight(0.5, 0) * 0.01,
        "F' zero-photon term " + fmt(r.zero_photon_f_prime));
  }
  {
    bool ok = true;
    for (int k = 0; k < 20; ++k) {
      const double e = 0.01 + 0.09 * (k % 4) / 3.0;
      const auto [x, y] = sample_strings(2000, e, seed + k);
      CascadeParams p;
      p.n = 2000;
      p.e = e;
      p.rng_seed = seed + k;
      const CascadeTranscript t = run_cascade(x, y, p);
      ok = ok && transcript_paired(t) && t.pass_invariant_ok && t.bits_a_to_b == t.bits_b_to_a &&
           reconstruct_bob_messages(t.from(Direction::a_to_b), xor_bits(x, y)) == t.from(Direction::b_to_a);
    }
    add("cascade_transcript", ok, "20 seeded sessions: pairing, pass invariant, reconstruction");
  }
  {
    SolveResult f, fp;
    f.lower = 0.4;
    fp.lower = 0.35;
    const KeyRateReport r = assemble_keyrates(f, fp, 0.03, 1.2, 0.5, false);
    const double leak = 0.5 * 1.2 * binary_entropy(0.03);
    add("keyrate_formulas",
        std::abs(r.r_naive - (r.r_incorrect - leak)) < 1e-15 && r.r_naive <= r.r_incorrect &&
            r.r_corrected <= r.r_incorrect,
        "R_naive = R_incorrect - p f h(e)");
  }
  return out;
}

CommandOutput cmd_verify(const ScenarioConfig&, std::uint64_t seed, int) {
  const auto checks = run_invariant_suite(seed);
  CommandOutput out;
  std::ostringstream os;
  bool ok = true;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    ok = ok && c.pass;
  }
  out.summary = os.str();
  out.files.emplace_back("verify.txt", os.str());
  out.exit_code = ok ? 0 : 1;
  return out;
}

}  // namespace cascadeqkd
