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

#include "scrm/objective.hpp"

#include <cmath>

#include "scrm/math_util.hpp"

namespace scrm {

void validate_config(const ObjectiveConfig& cfg) {
  if (cfg.lambda < 0.0) throw ConfigError("objective.lambda must be >= 0");
  if (cfg.alpha < 0.0) throw ConfigError("objective.alpha must be >= 0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("objective.delta must be in (0,1)");
  if (cfg.complexity_dim < 0) throw ConfigError("objective.complexity_dim must be >= 0");
}

double svp_objective(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                     const ObjectiveConfig& cfg) {
  validate_config(cfg);
  const long n = batch.size();
  if (n < 2) throw EstimatorError("SVP objective needs n >= 2");
  const double risk = ips_ix_estimate(batch, spec, theta, cfg.alpha);
  if (cfg.lambda == 0.0) return risk;
  const double var = empirical_variance_ips_ix(batch, spec, theta, cfg.alpha);
  return risk + cfg.lambda * std::sqrt(var / static_cast<double>(n));
}

ObjectiveEval svp_value_and_gradient(const Batch& batch, const PolicySpec& spec,
                                     const ModelParams& theta, const ObjectiveConfig& cfg) {
  validate_config(cfg);
  const long n = batch.size();
  if (n < 2) throw EstimatorError("SVP objective needs n >= 2");
  const std::size_t un = static_cast<std::size_t>(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> zeta(un);         // (w_ix - 1) y, the control-variate terms
  std::vector<double> risk_terms(un);   // w_ix y
  std::vector<Vec> dzeta(un);           // y dw/dtheta (= per-sample risk gradient too)
  for (std::size_t i = 0; i < un; ++i) {
    const Interaction& it = batch.interactions[i];
    const double log_target = log_density(spec, theta, it.context, it.action);
    if (!(it.propensity > 0.0)) throw EstimatorError("non-positive logged propensity");
    const double log_prop = std::log(it.propensity);
    const double w = ix_weight(log_target, log_prop, cfg.alpha);
    risk_terms[i] = w * it.loss;
    zeta[i] = (w - 1.0) * it.loss;
    // dw/dtheta = pi_b pi_t / (pi_b + alpha pi_t)^2 * score
    //           = w * pi_b / (pi_b + alpha pi_t) * score
    const double shrink =
        cfg.alpha == 0.0
            ? 1.0
            : std::exp(log_prop - logaddexp(log_prop, std::log(cfg.alpha) + log_target));
    dzeta[i] = (it.loss * w * shrink) * grad_log_density(spec, theta, it.context, it.action);
  }

  const double risk = canonical_mean(risk_terms);
  Vec grad_risk = Vec::Zero(theta.dim());
  for (const Vec& g : dzeta) grad_risk += g;
  grad_risk *= inv_n;

  ObjectiveEval eval;
  if (cfg.lambda == 0.0) {
    eval.value = risk;
    eval.gradient = grad_risk;
    return eval;
  }

  const double var = canonical_sample_variance(zeta);
  const double penalty = std::sqrt(var / static_cast<double>(n));
  eval.value = risk + cfg.lambda * penalty;

  if (var <= 0.0 || penalty == 0.0) {
    // sqrt kink at Vhat = 0: subgradient contribution defined as 0
    eval.gradient = grad_risk;
    return eval;
  }
  const double zeta_mean = canonical_mean(zeta);
  Vec dzeta_mean = Vec::Zero(theta.dim());
  for (const Vec& g : dzeta) dzeta_mean += g;
  dzeta_mean *= inv_n;
  Vec grad_var = Vec::Zero(theta.dim());
  for (std::size_t i = 0; i < un; ++i)
    grad_var += (zeta[i] - zeta_mean) * (dzeta[i] - dzeta_mean);
  grad_var *= 2.0 / static_cast<double>(n - 1);
  eval.gradient =
      grad_risk + (cfg.lambda / (2.0 * penalty * static_cast<double>(n))) * grad_var;
  return eval;
}

Vec svp_gradient(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                 const ObjectiveConfig& cfg) {
  return svp_value_and_gradient(batch, spec, theta, cfg).gradient;
}

double lambda_theoretical(long n, int complexity_dim, double delta) {
  if (n < 2) throw Error("lambda_theoretical: n must be >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("lambda_theoretical: delta must be in (0,1)");
  const double complexity = static_cast<double>(complexity_dim) * std::log(static_cast<double>(n));
  return std::sqrt(18.0 * (complexity + std::log(2.0 / delta)));
}

double generalization_bound_slack(long n, double lambda, double weight_bound, double delta) {
  if (n < 2) throw Error("generalization bound needs n >= 2");
  return 2.0 * lambda * lambda * weight_bound / static_cast<double>(n) +
         std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

double generalization_bound_rhs(const Batch& batch, const PolicySpec& spec,
                                const ModelParams& theta, const ObjectiveConfig& cfg) {
  const double objective = svp_objective(batch, spec, theta, cfg);
  return objective +
         generalization_bound_slack(batch.size(), cfg.lambda, spec.weight_bound, cfg.delta);
}

}  // namespace scrm
