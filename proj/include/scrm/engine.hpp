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

#ifndef SCRM_ENGINE_HPP
#define SCRM_ENGINE_HPP

#include <optional>
#include <utility>

#include "scrm/optimizer.hpp"

namespace scrm {

enum class Method { kScrm, kCrm };
std::string method_name(Method method);

enum class LambdaRule { kTheoretical, kFixed, kCrossValidated };
enum class AlphaRule { kInverseN, kFixed };

struct RolloutPlan {
  long n0 = 100;   // first batch size, >= 2
  int rollouts = 10;  // M; batches m = 0..M are collected
  int growth = 2;  // geometric factor of the schedule n_m = n0 * growth^m

  LambdaRule lambda_rule = LambdaRule::kTheoretical;
  double lambda_fixed = 0.0;
  std::vector<double> lambda_grid = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  int cv_folds = 5;

  AlphaRule alpha_rule = AlphaRule::kInverseN;
  double alpha_fixed = 0.0;

  bool pooled_fit = false;  // opt-in: fit on all past batches (naive-MIS concatenation)
  long eval_samples = 100000;  // Monte-Carlo test-risk size when no closed form exists
  std::optional<double> skyline_risk;  // reference risk when theta* is unknown
};

void validate_plan(const RolloutPlan& plan);

/// Geometric batch sizes [n0, n0*g, ..., n0*g^M], with an overflow guard.
std::vector<long> batch_schedule(const RolloutPlan& plan);

/// Number of rollouts a total budget n supports: floor(log2(1 + n/n0)).
int rollouts_for_budget(long total_samples, long n0);

/// State at rollout m: theta is the current model entering the rollout (the
/// deployed model for SCRM; CRM always deploys theta_0 and theta tracks the
/// learned sequence). lambda/alpha are the values used in the fit on this
/// rollout's data. excess is NaN when no reference risk is known.
struct RolloutRecord {
  int m = 0;
  long batch_size = 0;
  long cum_samples = 0;
  double lambda = 0.0;
  double alpha = 0.0;
  ModelParams theta;
  double test_risk = 0.0;
  double test_risk_stderr = 0.0;
  double excess = 0.0;
};

struct RunResult {
  Method method = Method::kScrm;
  std::uint64_t seed = 0;
  std::vector<RolloutRecord> rollouts;  // m = 0..M
  ModelParams final_theta;              // model learned from the last batch
  double final_risk = 0.0;
  double final_risk_stderr = 0.0;
  double final_excess = 0.0;
  double regret = 0.0;  // sum over m of excess_m * n_{m+1}, n_{M+1} = n0*g^{M+1}
  long total_samples = 0;
  double wall_seconds = 0.0;

  /// (cumulative samples consumed, excess of the model learned from them),
  /// one point per rollout; the last point is the final model.
  std::vector<std::pair<long, double>> learning_curve() const;

  /// Same curve with test risk instead of excess.
  std::vector<std::pair<long, double>> risk_curve() const;
};

/// Draws one i.i.d. batch under the behavior model. Context and loss noise
/// streams are keyed only by (run_seed, rollout), so paired runs share them.
Batch collect_batch(const Environment& env, const PolicySpec& spec,
                    const ModelParams& behavior, long n, std::uint64_t run_seed, int rollout);

/// Sequential loop: deploy the current model, collect, fit on the newest
/// batch (or the pooled past when pooled_fit), repeat.
RunResult run_scrm(const Environment& env, const PolicySpec& spec, const ModelParams& theta0,
                   const RolloutPlan& plan, const ObjectiveConfig& obj_cfg,
                   const OptimizerConfig& opt_cfg, std::uint64_t run_seed);

/// Baseline loop: every batch is collected under theta_0 and each fit uses
/// the concatenation of all batches so far.
RunResult run_crm(const Environment& env, const PolicySpec& spec, const ModelParams& theta0,
                  const RolloutPlan& plan, const ObjectiveConfig& obj_cfg,
                  const OptimizerConfig& opt_cfg, std::uint64_t run_seed);

/// L(theta) - L(theta*) against the closed-form optimum, or against a
/// caller-provided skyline risk when theta* is unknown. NaN when neither is
/// available.
double excess_risk(const Environment& env, const PolicySpec& spec, const ModelParams& theta,
                   std::optional<double> skyline_risk = std::nullopt, long mc_samples = 100000,
                   std::uint64_t eval_seed = 0);

/// Literal regret sum over the recorded rollouts.
double expected_regret(const RunResult& result, const RolloutPlan& plan);

/// k-fold selection of the penalty strength: fit with each candidate on
/// training folds, score by the non-penalized IPS-IX risk on held-out folds,
/// smallest mean estimate wins, ties to the smaller lambda.
double select_lambda_cv(const std::vector<Batch>& history, const PolicySpec& spec,
                        const std::vector<double>& candidates, int folds,
                        const ObjectiveConfig& base_cfg, const OptimizerConfig& opt_cfg,
                        const ModelParams& warm_start, std::uint64_t seed);

}  // namespace scrm

#endif  // SCRM_ENGINE_HPP
