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

#ifndef SCRM_OBJECTIVE_HPP
#define SCRM_OBJECTIVE_HPP

#include "scrm/estimators.hpp"

namespace scrm {

struct ObjectiveConfig {
  double lambda = 0.0;    // variance-penalty strength
  double alpha = 0.0;     // IPS-IX smoothing
  double delta = 0.05;    // confidence level for bounds and the lambda rule
  int complexity_dim = 1; // d in the d*log(n) complexity surrogate
};

void validate_config(const ObjectiveConfig& cfg);

/// Sample-variance-penalized risk: L_ix + lambda * sqrt(V_ix / n). n >= 2.
double svp_objective(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                     const ObjectiveConfig& cfg);

/// Exact gradient of svp_objective. The per-sample weight derivative is
/// dw/dtheta = pi_b pi_theta / (pi_b + alpha pi_theta)^2 * grad log pi_theta;
/// at Vhat = 0 the penalty's subgradient contribution is taken as 0.
Vec svp_gradient(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                 const ObjectiveConfig& cfg);

struct ObjectiveEval {
  double value = 0.0;
  Vec gradient;
};

/// Fused value + gradient (one pass over the batch).
ObjectiveEval svp_value_and_gradient(const Batch& batch, const PolicySpec& spec,
                                     const ModelParams& theta, const ObjectiveConfig& cfg);

/// Theoretical penalty strength sqrt(18 (d log n + log(2/delta))). n >= 2.
double lambda_theoretical(long n, int complexity_dim, double delta);

/// The two deterministic slack terms of the generalization bound:
/// 2 lambda^2 W / n + sqrt(log(2/delta) / (2n)).
double generalization_bound_slack(long n, double lambda, double weight_bound, double delta);

/// High-probability upper bound on the true risk:
/// L_ix + lambda sqrt(V_ix/n) + 2 lambda^2 W / n + sqrt(log(2/delta)/(2n)).
/// A certificate, not a learning target; W comes from the policy spec.
double generalization_bound_rhs(const Batch& batch, const PolicySpec& spec,
                                const ModelParams& theta, const ObjectiveConfig& cfg);

}  // namespace scrm

#endif  // SCRM_OBJECTIVE_HPP
