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

#include "scrm/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "scrm/math_util.hpp"

namespace scrm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RiskPoint {
  double value = 0.0;
  double stderror = 0.0;
};

RiskPoint evaluate_risk(const Environment& env, const PolicySpec& spec, const ModelParams& theta,
                        const RolloutPlan& plan, std::uint64_t run_seed, int rollout) {
  if (env.has_closed_form_risk()) return {env.closed_form_risk(spec, theta), 0.0};
  Rng rng = make_stream(run_seed, static_cast<std::uint64_t>(rollout), StreamPurpose::kEval);
  const RiskEstimate est = env.monte_carlo_risk(spec, theta, plan.eval_samples, rng);
  return {est.value, est.stderror};
}

double reference_risk(const Environment& env, const PolicySpec& spec, const RolloutPlan& plan) {
  if (env.has_closed_form_risk()) {
    const auto star = env.optimal_model();
    return env.closed_form_risk(spec, *star);
  }
  if (plan.skyline_risk) return *plan.skyline_risk;
  return kNaN;
}

// Concatenates batches into one pseudo-batch; per-interaction propensities
// stay authoritative, behavior_theta is the newest batch's (not spot-checked
// for mixed-behavior pools).
Batch pool_batches(const std::vector<Batch>& batches) {
  Batch pooled;
  pooled.behavior_theta = batches.back().behavior_theta;
  pooled.rollout_index = batches.back().rollout_index;
  std::size_t total = 0;
  for (const Batch& b : batches) total += b.interactions.size();
  pooled.interactions.reserve(total);
  for (const Batch& b : batches)
    pooled.interactions.insert(pooled.interactions.end(), b.interactions.begin(),
                               b.interactions.end());
  return pooled;
}

RunResult run_loop(Method method, const Environment& env, const PolicySpec& spec,
                   const ModelParams& theta0, const RolloutPlan& plan,
                   const ObjectiveConfig& obj_cfg, const OptimizerConfig& opt_cfg,
                   std::uint64_t run_seed) {
  validate_plan(plan);
  validate_spec(spec);
  validate_params(theta0);
  const auto t_start = std::chrono::steady_clock::now();

  const std::vector<long> schedule = batch_schedule(plan);
  const double ref_risk = reference_risk(env, spec, plan);

  RunResult result;
  result.method = method;
  result.seed = run_seed;

  ModelParams current = project_to_ball(theta0, opt_cfg.radius);
  std::vector<Batch> history;
  history.reserve(schedule.size());
  long cum = 0;

  for (int m = 0; m < static_cast<int>(schedule.size()); ++m) {
    const long n_m = schedule[static_cast<std::size_t>(m)];
    const ModelParams& behavior = method == Method::kScrm ? current : theta0;
    Batch batch = collect_batch(env, spec, behavior, n_m, run_seed, m);
    spot_check_batch(batch, spec);
    cum += n_m;
    history.push_back(std::move(batch));

    // data the fit at this rollout sees
    const bool pool = method == Method::kCrm || plan.pooled_fit;
    std::optional<Batch> pooled_storage;
    if (pool && history.size() > 1) pooled_storage = pool_batches(history);
    const Batch& fit_batch = pooled_storage ? *pooled_storage : history.back();
    const long n_fit = fit_batch.size();

    ObjectiveConfig cfg = obj_cfg;
    cfg.alpha = plan.alpha_rule == AlphaRule::kInverseN ? 1.0 / static_cast<double>(n_fit)
                                                        : plan.alpha_fixed;
    switch (plan.lambda_rule) {
      case LambdaRule::kTheoretical:
        cfg.lambda = lambda_theoretical(n_fit, cfg.complexity_dim, cfg.delta);
        break;
      case LambdaRule::kFixed:
        cfg.lambda = plan.lambda_fixed;
        break;
      case LambdaRule::kCrossValidated: {
        // cross-validate on past data when there is any; at the first
        // rollout the only data available is the fresh batch itself
        std::vector<Batch> past(history.begin(),
                                history.size() > 1 ? history.end() - 1 : history.end());
        cfg.lambda = select_lambda_cv(past, spec, plan.lambda_grid, plan.cv_folds, cfg, opt_cfg,
                                      current, substream(run_seed, m,
                                                         static_cast<std::uint64_t>(
                                                             StreamPurpose::kCvShuffle)));
        break;
      }
    }

    const RiskPoint risk = evaluate_risk(env, spec, current, plan, run_seed, m);
    RolloutRecord record;
    record.m = m;
    record.batch_size = n_m;
    record.cum_samples = cum;
    record.lambda = cfg.lambda;
    record.alpha = cfg.alpha;
    record.theta = current;
    record.test_risk = risk.value;
    record.test_risk_stderr = risk.stderror;
    record.excess = std::isnan(ref_risk) ? kNaN : risk.value - ref_risk;
    result.rollouts.push_back(record);

    Rng restart_rng =
        make_stream(run_seed, static_cast<std::uint64_t>(m), StreamPurpose::kRestart);
    MinimizeResult fit = minimize_objective(fit_batch, spec, current, cfg, opt_cfg,
                                            opt_cfg.random_restarts > 0 ? &restart_rng : nullptr);
    if (fit.objective > fit.initial_objective + 1e-12)
      throw Error("optimizer worsened the in-sample objective");
    current = fit.theta;
  }

  result.total_samples = cum;
  const RiskPoint final_risk =
      evaluate_risk(env, spec, current, plan, run_seed, static_cast<int>(schedule.size()));
  result.final_theta = current;
  result.final_risk = final_risk.value;
  result.final_risk_stderr = final_risk.stderror;
  result.final_excess = std::isnan(ref_risk) ? kNaN : final_risk.value - ref_risk;
  result.regret = expected_regret(result, plan);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace

std::string method_name(Method method) {
  return method == Method::kScrm ? "scrm" : "crm";
}

void validate_plan(const RolloutPlan& plan) {
  if (plan.n0 < 2) throw ConfigError("plan.n0 must be >= 2");
  if (plan.rollouts < 0) throw ConfigError("plan.rollouts must be >= 0");
  if (plan.growth < 1) throw ConfigError("plan.growth must be >= 1");
  if (plan.cv_folds < 2) throw ConfigError("plan.cv_folds must be >= 2");
  if (plan.alpha_rule == AlphaRule::kFixed && plan.alpha_fixed < 0.0)
    throw ConfigError("plan.alpha_fixed must be >= 0");
  if (plan.lambda_rule == LambdaRule::kFixed && plan.lambda_fixed < 0.0)
    throw ConfigError("plan.lambda_fixed must be >= 0");
  if (plan.lambda_rule == LambdaRule::kCrossValidated && plan.lambda_grid.empty())
    throw ConfigError("plan.lambda_grid must be nonempty for cross-validation");
  if (plan.eval_samples < 1) throw ConfigError("plan.eval_samples must be >= 1");
}

std::vector<long> batch_schedule(const RolloutPlan& plan) {
  validate_plan(plan);
  std::vector<long> schedule;
  schedule.reserve(static_cast<std::size_t>(plan.rollouts) + 1);
  long n = plan.n0;
  for (int m = 0; m <= plan.rollouts; ++m) {
    schedule.push_back(n);
    if (m < plan.rollouts) {
      if (n > std::numeric_limits<long>::max() / plan.growth)
        throw Error("batch schedule overflows: n0 * growth^m too large");
      n *= plan.growth;
    }
  }
  return schedule;
}

int rollouts_for_budget(long total_samples, long n0) {
  if (n0 < 2 || total_samples < 0) throw Error("rollouts_for_budget: bad arguments");
  return static_cast<int>(std::floor(
      std::log2(1.0 + static_cast<double>(total_samples) / static_cast<double>(n0))));
}

std::vector<std::pair<long, double>> RunResult::learning_curve() const {
  std::vector<std::pair<long, double>> curve;
  curve.reserve(rollouts.size());
  for (std::size_t m = 0; m + 1 < rollouts.size(); ++m)
    curve.emplace_back(rollouts[m].cum_samples, rollouts[m + 1].excess);
  if (!rollouts.empty()) curve.emplace_back(rollouts.back().cum_samples, final_excess);
  return curve;
}

std::vector<std::pair<long, double>> RunResult::risk_curve() const {
  std::vector<std::pair<long, double>> curve;
  curve.reserve(rollouts.size());
  for (std::size_t m = 0; m + 1 < rollouts.size(); ++m)
    curve.emplace_back(rollouts[m].cum_samples, rollouts[m + 1].test_risk);
  if (!rollouts.empty()) curve.emplace_back(rollouts.back().cum_samples, final_risk);
  return curve;
}

Batch collect_batch(const Environment& env, const PolicySpec& spec,
                    const ModelParams& behavior, long n, std::uint64_t run_seed, int rollout) {
  if (n < 1) throw Error("collect_batch: n must be >= 1");
  validate_params(behavior);
  Rng ctx_rng = make_stream(run_seed, static_cast<std::uint64_t>(rollout), StreamPurpose::kContext);
  Rng act_rng = make_stream(run_seed, static_cast<std::uint64_t>(rollout), StreamPurpose::kAction);
  Rng loss_rng = make_stream(run_seed, static_cast<std::uint64_t>(rollout), StreamPurpose::kLoss);

  Batch batch;
  batch.behavior_theta = behavior;
  batch.rollout_index = rollout;
  batch.interactions.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    Interaction it;
    it.context = env.sample_context(ctx_rng);
    const SampledAction sa = sample_action(spec, behavior, it.context, act_rng);
    it.action = sa.action;
    it.propensity = sa.propensity;
    it.loss = env.sample_loss(it.context, it.action, loss_rng);
    batch.interactions.push_back(std::move(it));
  }
  return batch;
}

RunResult run_scrm(const Environment& env, const PolicySpec& spec, const ModelParams& theta0,
                   const RolloutPlan& plan, const ObjectiveConfig& obj_cfg,
                   const OptimizerConfig& opt_cfg, std::uint64_t run_seed) {
  return run_loop(Method::kScrm, env, spec, theta0, plan, obj_cfg, opt_cfg, run_seed);
}

RunResult run_crm(const Environment& env, const PolicySpec& spec, const ModelParams& theta0,
                  const RolloutPlan& plan, const ObjectiveConfig& obj_cfg,
                  const OptimizerConfig& opt_cfg, std::uint64_t run_seed) {
  return run_loop(Method::kCrm, env, spec, theta0, plan, obj_cfg, opt_cfg, run_seed);
}

double excess_risk(const Environment& env, const PolicySpec& spec, const ModelParams& theta,
                   std::optional<double> skyline_risk, long mc_samples, std::uint64_t eval_seed) {
  if (env.has_closed_form_risk()) {
    const auto star = env.optimal_model();
    return env.closed_form_risk(spec, theta) - env.closed_form_risk(spec, *star);
  }
  if (!skyline_risk) return kNaN;
  Rng rng = make_stream(eval_seed, 0, StreamPurpose::kEval);
  return env.monte_carlo_risk(spec, theta, mc_samples, rng).value - *skyline_risk;
}

double expected_regret(const RunResult& result, const RolloutPlan& plan) {
  // R_n = sum_m excess_m * n_{m+1}, taken literally: the last term indexes
  // the batch size that would come next in the schedule.
  double regret = 0.0;
  for (const RolloutRecord& rec : result.rollouts) {
    if (std::isnan(rec.excess)) return kNaN;
    const double next_n = static_cast<double>(rec.batch_size) * plan.growth;
    regret += rec.excess * next_n;
  }
  return regret;
}

double select_lambda_cv(const std::vector<Batch>& history, const PolicySpec& spec,
                        const std::vector<double>& candidates, int folds,
                        const ObjectiveConfig& base_cfg, const OptimizerConfig& opt_cfg,
                        const ModelParams& warm_start, std::uint64_t seed) {
  if (candidates.empty()) throw Error("select_lambda_cv: no candidates");
  if (candidates.size() == 1) return candidates.front();
  if (folds < 2) throw Error("select_lambda_cv: folds must be >= 2");

  Batch pooled = pool_batches(history);
  const long n = pooled.size();
  if (n < 2 * folds) throw Error("select_lambda_cv: need at least 2*folds samples");

  // deterministic fold assignment: shuffled round-robin
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_int(i)]);

  std::vector<double> sorted_candidates(candidates);
  std::sort(sorted_candidates.begin(), sorted_candidates.end());

  double best_lambda = sorted_candidates.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (const double lambda : sorted_candidates) {
    std::vector<double> fold_scores;
    fold_scores.reserve(static_cast<std::size_t>(folds));
    for (int f = 0; f < folds; ++f) {
      Batch train, held;
      train.behavior_theta = pooled.behavior_theta;
      held.behavior_theta = pooled.behavior_theta;
      for (std::size_t idx = 0; idx < order.size(); ++idx) {
        const Interaction& it = pooled.interactions[order[idx]];
        if (static_cast<int>(idx % static_cast<std::size_t>(folds)) == f)
          held.interactions.push_back(it);
        else
          train.interactions.push_back(it);
      }
      ObjectiveConfig cfg = base_cfg;
      cfg.lambda = lambda;
      cfg.alpha = 1.0 / static_cast<double>(train.size());
      const MinimizeResult fit = minimize_objective(train, spec, warm_start, cfg, opt_cfg);
      const double score = ips_ix_estimate(held, spec, fit.theta,
                                           1.0 / static_cast<double>(held.size()));
      fold_scores.push_back(score);
    }
    const double score = canonical_mean(std::move(fold_scores));
    if (score < best_score) {  // strict: ties keep the smaller lambda
      best_score = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace scrm
