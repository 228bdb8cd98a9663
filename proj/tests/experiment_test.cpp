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

#include "gtest/gtest.h"

#include <atomic>
#include <cstdio>
#include <fstream>

using namespace cascadeqkd;
using nlohmann::json;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Experiment, defaults) {
  const ScenarioConfig c = parse_config(json::object());
  EXPECT_EQ(c.protocol, Protocol::qubit);
  EXPECT_EQ(c.grainings.size(), 3u);
  EXPECT_EQ(c.sweep.values(), std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(c.f_eff, 1.16);
  const ScenarioConfig d = parse_config(json{{"protocol", "decoy"}});
  EXPECT_EQ(d.channel.intensities.size(), 3u);
}

TEST(Experiment, sweep_values) {
  const ScenarioConfig c =
      parse_config(json{{"sweep", {{"variable", "theta_deg"}, {"start", 0}, {"stop", 25}, {"step", 5}}}});
  EXPECT_EQ(c.sweep.values(), (std::vector<double>{0, 5, 10, 15, 20, 25}));
}

TEST(Experiment, config_errors_name_the_field) {
  EXPECT_NE(config_error(json{{"chanel", json::object()}}).find("config.chanel"), std::string::npos);
  EXPECT_NE(config_error(json{{"channel", {{"q", "x"}}}}).find("channel.q"), std::string::npos);
  EXPECT_NE(config_error(json{{"channel", {{"q", 1.5}}}}).find("channel"), std::string::npos);
  EXPECT_NE(config_error(json{{"protocol", "qutrit"}}).find("config.protocol"), std::string::npos);
  EXPECT_NE(config_error(json{{"grainings", json::array()}}).find("config.grainings"), std::string::npos);
  EXPECT_NE(config_error(json{{"sweep", {{"variable", "eta"}}}}).find("sweep.variable"), std::string::npos);
  EXPECT_NE(config_error(json{{"sweep", {{"variable", "q"}, {"start", 0.2}, {"stop", 0.1}}}}).find("sweep.stop"),
            std::string::npos);
  EXPECT_NE(config_error(json{{"keyrate", {{"f_eff", 0.5}}}}).find("keyrate.f_eff"), std::string::npos);
  EXPECT_NE(config_error(json{{"cascade", {{"e", {0.6}}}}}).find("cascade.e"), std::string::npos);
  EXPECT_NE(config_error(json{{"table4", {{"intensities", {0.1, 0.5}}}}}).find("table4.intensities"),
            std::string::npos);
}

TEST(Experiment, syntax_error_reports_line_and_column) {
  const std::string path = write_temp("bad.json", "{\n  \"protocol\": \"qubit\",\n  ]\n}");
  try {
    load_config(path);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_config(testing::TempDir() + "missing.json"), ConfigError);
}

TEST(Experiment, aggregate_rule) {
  using V = VerdictKind;
  EXPECT_EQ(aggregate_verdicts({V::equal, V::equal}), V::equal);
  EXPECT_EQ(aggregate_verdicts({V::equal, V::strictly_greater}), V::strictly_greater);
  EXPECT_EQ(aggregate_verdicts({V::strictly_greater, V::inconclusive}), V::inconclusive);
  EXPECT_EQ(aggregate_verdicts({}), V::inconclusive);
}

TEST(Experiment, sifted_stats_oracle) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(4, 5);
  t(0, 0) = 0.2;
  t(0, 1) = 0.05;
  t(1, 1) = 0.15;
  t(2, 2) = 0.1;
  t(0, 2) = 0.3;  // basis mismatch
  t(3, 4) = 0.2;  // no click
  const SiftedStats s = sifted_stats(t);
  EXPECT_NEAR(s.e, 0.05 / 0.4, 1e-15);
  EXPECT_NEAR(s.p_pass, 0.5, 1e-15);
}

TEST(Experiment, parallel_for_covers_every_index) {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(5, 2, [](int i) {
                 if (i == 3) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Experiment, keyrate_rows_and_determinism) {
  const ScenarioConfig c = parse_config(
      json{{"channel", {{"q", 0.1}}}, {"sweep", {{"variable", "theta_deg"}, {"start", 0}, {"stop", 10}, {"step", 5}}}});
  const CommandOutput a = cmd_keyrate(c, 2);
  const CommandOutput b = cmd_keyrate(c, 1);
  ASSERT_EQ(a.files.size(), 1u);
  EXPECT_EQ(a.files[0].second, b.files[0].second);
  EXPECT_EQ(std::count(a.files[0].second.begin(), a.files[0].second.end(), '\n'), 1 + 3 * 3);
  EXPECT_EQ(a.exit_code, 0);
}

TEST(Experiment, grid_csv_layout) {
  VerdictGrid g;
  g.columns = {"a", "b"};
  g.rows = {Graining::coarse};
  g.cells = {{VerdictKind::equal, VerdictKind::strictly_greater}};
  EXPECT_EQ(grid_to_csv(g), "graining,a,b\ncoarse,=,>\n");
}

TEST(Experiment, decoy_bounds_command) {
  EXPECT_THROW(cmd_decoy_bounds(parse_config(json::object())), ConfigError);
  const CommandOutput o = cmd_decoy_bounds(parse_config(json{{"protocol", "decoy"}, {"channel", {{"eta", 0.3}}}}));
  EXPECT_EQ(o.exit_code, 0);
  EXPECT_EQ(o.files[0].second.rfind("statistic,low,high,truth", 0), 0u);
}

TEST(Experiment, cascade_command) {
  const ScenarioConfig c = parse_config(json{{"cascade", {{"n", 2000}, {"e", {0.05}}, {"seeds", 5}}}});
  const CommandOutput o = cmd_cascade(c, 2);
  EXPECT_EQ(o.exit_code, 0);
  ASSERT_EQ(o.files.size(), 2u);
  EXPECT_EQ(std::count(o.files[0].second.begin(), o.files[0].second.end(), '\n'), 6);
  EXPECT_EQ(o.files[0].second, cmd_cascade(c, 1).files[0].second);
}

TEST(Experiment, gradient_mutation_is_caught) {
  EXPECT_LT(gradient_fd_error(build_qubit_maps(false), 5, 1), 1e-5);
  EXPECT_GT(gradient_fd_error(build_qubit_maps(false), 5, 1, true), 1e-2);
}

TEST(Experiment, invariant_suite_passes) {
  for (const CheckResult& c : run_invariant_suite(1)) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}
