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

// Command-line front end.

#include "cascadeqkd/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace cascadeqkd;

constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;

int write_output(const CommandOutput& out, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << dir << ": " << ec.message() << "\n";
    return kExitConfig;
  }
  for (const auto& [name, contents] : out.files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << contents;
    if (!f) {
      std::cerr << "error: cannot write " << path << "\n";
      return kExitConfig;
    }
  }
  std::cout << out.summary;
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic QKD key rates under Cascade error correction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  bool seed_given = false;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; }, "base RNG seed");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  const std::vector<std::string> names{"keyrate", "table2", "table4", "cascade", "decoy-bounds", "verify"};
  const std::vector<std::string> help{"F and F' bounds and key rates over a sweep",
                                      "qubit verdict grid",
                                      "decoy verdict grid",
                                      "batch Cascade runs",
                                      "single-photon yield bounds",
                                      "invariant suite"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < names.size(); ++i) {
    subs.push_back(app.add_subcommand(names[i], help[i]));
    add_common(subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    ScenarioConfig cfg = config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(config_path);
    if (seed_given) cfg.cascade.seed = seed;
    CommandOutput out;
    if (subs[0]->parsed()) out = cmd_keyrate(cfg, jobs);
    if (subs[1]->parsed()) out = cmd_table2(cfg, jobs);
    if (subs[2]->parsed()) out = cmd_table4(cfg, jobs);
    if (subs[3]->parsed()) out = cmd_cascade(cfg, jobs);
    if (subs[4]->parsed()) out = cmd_decoy_bounds(cfg);
    if (subs[5]->parsed()) out = cmd_verify(cfg, seed, jobs);
    return write_output(out, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  }
}
