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

#include "scrm/optimizer.hpp"

#include <cmath>

namespace scrm {

namespace {

constexpr double kStepFloor = 1e-16;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void validate_config(const OptimizerConfig& cfg) {
  if (cfg.radius <= 0.0) throw ConfigError("optimizer.radius must be > 0");
  if (cfg.max_iters < 0) throw ConfigError("optimizer.max_iters must be >= 0");
  if (cfg.step_init <= 0.0) throw ConfigError("optimizer.step_init must be > 0");
  if (!(cfg.armijo_c > 0.0 && cfg.armijo_c < 1.0))
    throw ConfigError("optimizer.armijo_c must be in (0,1)");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0))
    throw ConfigError("optimizer.shrink must be in (0,1)");
  if (cfg.grad_tol <= 0.0) throw ConfigError("optimizer.grad_tol must be > 0");
  if (cfg.random_restarts < 0) throw ConfigError("optimizer.random_restarts must be >= 0");
}

Vec project_to_ball(const Vec& theta, double radius) {
  if (radius <= 0.0) throw Error("projection radius must be > 0");
  const double norm = theta.norm();
  if (norm <= radius) return theta;
  return theta * (radius / norm);
}

ModelParams project_to_ball(const ModelParams& theta, double radius) {
  return ModelParams(project_to_ball(theta.theta, radius));
}

MinimizeResult minimize(const ObjectiveFn& f, const GradientFn& grad, const Vec& theta_init,
                        const OptimizerConfig& cfg) {
  validate_config(cfg);
  MinimizeResult result;
  std::vector<IterRecord>& trace = result.trace;

  Vec theta = project_to_ball(theta_init, cfg.radius);
  double value = f(theta);
  if (!finite(value)) throw OptimError("non-finite objective at the starting point", trace);
  result.initial_objective = value;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Vec g = grad(theta);
    if (!g.allFinite()) throw OptimError("non-finite gradient at iteration " +
                                             std::to_string(iter),
                                         trace);
    const double stationarity = (theta - project_to_ball(theta - g, cfg.radius)).norm();
    if (stationarity <= cfg.grad_tol) break;

    // Backtracking on the projected step; the decrease target uses the
    // actual displacement so the constraint is handled correctly.
    double step = cfg.step_init;
    bool accepted = false;
    while (step >= kStepFloor) {
      const Vec candidate = project_to_ball(theta - step * g, cfg.radius);
      const double decrease_target = cfg.armijo_c * g.dot(theta - candidate);
      const double candidate_value = f(candidate);
      if (!finite(candidate_value))
        throw OptimError("non-finite objective during line search", trace);
      if (candidate_value <= value - decrease_target) {
        theta = candidate;
        value = candidate_value;
        accepted = true;
        ++result.accepted_steps;
        trace.push_back(IterRecord{iter, value, stationarity, step});
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;  // step underflow
  }

  result.theta = ModelParams(theta);
  result.objective = value;
  return result;
}

MinimizeResult minimize_objective(const Batch& batch, const PolicySpec& spec,
                                  const ModelParams& theta_init, const ObjectiveConfig& obj_cfg,
                                  const OptimizerConfig& opt_cfg, Rng* restart_rng) {
  validate_params(theta_init);
  const ObjectiveFn f = [&](const Vec& t) {
    return svp_objective(batch, spec, ModelParams(t), obj_cfg);
  };
  const GradientFn g = [&](const Vec& t) {
    return svp_gradient(batch, spec, ModelParams(t), obj_cfg);
  };

  MinimizeResult best = minimize(f, g, theta_init.theta, opt_cfg);
  const double warm_start_objective = best.initial_objective;
  if (opt_cfg.random_restarts > 0) {
    if (restart_rng == nullptr)
      throw Error("random restarts requested without a random stream");
    for (int r = 0; r < opt_cfg.random_restarts; ++r) {
      Vec start(theta_init.dim());
      for (int i = 0; i < start.size(); ++i) start[i] = restart_rng->normal();
      // uniform direction scaled into the ball
      const double norm = start.norm();
      if (norm > 0.0)
        start *= opt_cfg.radius * std::pow(restart_rng->uniform01(),
                                           1.0 / static_cast<double>(start.size())) / norm;
      MinimizeResult candidate = minimize(f, g, start, opt_cfg);
      if (candidate.objective < best.objective) best = std::move(candidate);
    }
  }
  // never worsen the warm start's in-sample objective, whichever start won
  best.initial_objective = warm_start_objective;
  return best;
}

}  // namespace scrm
