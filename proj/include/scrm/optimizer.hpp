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

#ifndef SCRM_OPTIMIZER_HPP
#define SCRM_OPTIMIZER_HPP

#include <functional>
#include <vector>

#include "scrm/objective.hpp"

namespace scrm {

struct OptimizerConfig {
  double radius = 10.0;     // K: parameter ball constraint
  int max_iters = 1000;
  double step_init = 1.0;
  double armijo_c = 1e-4;   // sufficient-decrease constant
  double shrink = 0.5;      // backtracking factor
  double grad_tol = 1e-6;   // stationarity threshold
  int random_restarts = 0;  // extra random starts inside the ball
};

void validate_config(const OptimizerConfig& cfg);

Vec project_to_ball(const Vec& theta, double radius);
ModelParams project_to_ball(const ModelParams& theta, double radius);

struct IterRecord {
  int iter = 0;
  double objective = 0.0;
  double stationarity = 0.0;  // norm of theta - proj(theta - grad)
  double step = 0.0;
};

struct MinimizeResult {
  ModelParams theta;
  double objective = 0.0;
  double initial_objective = 0.0;
  int accepted_steps = 0;
  std::vector<IterRecord> trace;
};

/// Non-finite objective or gradient encountered mid-descent; carries the
/// trace accumulated so far.
class OptimError : public Error {
 public:
  OptimError(const std::string& what, std::vector<IterRecord> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<IterRecord>& trace() const { return trace_; }

 private:
  std::vector<IterRecord> trace_;
};

using ObjectiveFn = std::function<double(const Vec&)>;
using GradientFn = std::function<Vec(const Vec&)>;

/// Projected gradient descent with Armijo backtracking over the ball
/// ||theta|| <= radius. Accepted objective values are nonincreasing;
/// terminates on grad_tol, max_iters, or step underflow.
MinimizeResult minimize(const ObjectiveFn& f, const GradientFn& grad, const Vec& theta_init,
                        const OptimizerConfig& cfg);

/// Minimizes the SVP objective on a batch, warm-started at theta_init.
/// With random_restarts > 0 extra starts are drawn inside the ball (rng
/// required) and the best final objective wins, ties to the lowest start
/// index.
MinimizeResult minimize_objective(const Batch& batch, const PolicySpec& spec,
                                  const ModelParams& theta_init, const ObjectiveConfig& obj_cfg,
                                  const OptimizerConfig& opt_cfg, Rng* restart_rng = nullptr);

}  // namespace scrm

#endif  // SCRM_OPTIMIZER_HPP
