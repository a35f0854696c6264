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

#ifndef SCRM_CONFIG_HPP
#define SCRM_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "scrm/diagnostics.hpp"

namespace scrm {

// Flat typed key-value config with dotted section keys. Unknown keys are
// errors, not warnings; the full schema lives in docs/config.md.

struct RawConfig {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;  // for diagnostics
};

RawConfig parse_config_text(const std::string& text);
RawConfig parse_config_file(const std::string& path);

enum class SweepKind { kNone, kLambda, kDistance };

struct ExperimentConfig {
  EnvSpec env;
  PolicySpec policy;
  RolloutPlan plan;
  ObjectiveConfig objective;
  OptimizerConfig optimizer;
  Vec theta0;                      // defaults to zeros of the right dimension
  std::vector<Method> methods = {Method::kScrm, Method::kCrm};
  std::vector<std::uint64_t> seeds = {0};
  std::uint64_t master_seed = 0;

  // estimator study section
  std::vector<double> study_shifts;
  std::vector<EstimatorVariant> study_estimators;
  long study_n = 1000;
  int study_replications = 500;

  // sweep section
  SweepKind sweep_kind = SweepKind::kNone;
  std::vector<double> sweep_lambdas;
  std::vector<double> sweep_delta0;
  std::vector<double> sweep_sigmas = {0.1, 0.3, 1.0, 3.0};
};

/// Builds, validates and fully defaults an experiment from raw keys.
/// Throws ConfigError naming the offending key and line.
ExperimentConfig build_experiment_config(const RawConfig& raw);

/// Renders the effective config; parsing the output reproduces the config.
std::string render_effective_config(const ExperimentConfig& config);

}  // namespace scrm

#endif  // SCRM_CONFIG_HPP
