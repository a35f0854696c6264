// Copyright 2026 The scrm-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <string>
#include <vector>

#include "scrm/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"scrm-lab: off-policy learning simulator with sequential deployments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string seeds_arg;
  int threads = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
    cmd->add_option("--out", out_dir, "output directory (default: current)");
    cmd->add_option("--seeds", seeds_arg, "comma-separated seed list, overrides the config");
    cmd->add_option("--threads", threads, "worker threads (0: SCRM_LAB_THREADS, then hardware)");
  };

  CLI::App* run = app.add_subcommand("run", "sequential and baseline learning runs");
  CLI::App* estimators = app.add_subcommand("estimators", "estimator bias/variance study");
  CLI::App* sweep = app.add_subcommand("sweep", "lambda-grid or distance sweep");
  add_common(run);
  add_common(estimators);
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  scrm::CliOverrides overrides;
  overrides.out_dir = out_dir;
  overrides.threads = threads;
  if (!seeds_arg.empty()) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= seeds_arg.size()) {
      const std::size_t comma = seeds_arg.find(',', pos);
      const std::string item = seeds_arg.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!item.empty()) {
        try {
          seeds.push_back(std::stoull(item));
        } catch (const std::exception&) {
          std::fprintf(stderr, "[scrm-lab] config error: --seeds: bad entry '%s'\n",
                       item.c_str());
          return 1;
        }
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    overrides.seeds = seeds;
  }

  if (run->parsed()) return scrm::cmd_run(config_path, overrides);
  if (estimators->parsed()) return scrm::cmd_estimators(config_path, overrides);
  return scrm::cmd_sweep(config_path, overrides);
}
