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

#ifndef SCRM_DIAGNOSTICS_HPP
#define SCRM_DIAGNOSTICS_HPP

#include "scrm/engine.hpp"

namespace scrm {

/// Closed-form variance of importance weights between two non-contextual
/// Gaussian (or lognormal, with log-space means) policies sharing sigma:
/// exp((theta* - theta)^2 / sigma^2) - 1.
double gaussian_weight_variance(double theta, double theta_star, double sigma);

/// Grid probe of the Holder-type error-bound ratio
/// R(theta, beta) = Var[pi*/pi_theta] / (L(theta) - L(theta*))^beta.
struct HolderProbe {
  double beta = 1.0;
  double gamma = 0.0;  // candidate constant; holder_check verifies it if > 0
  std::vector<double> theta_grid;
  double theta_star = 0.0;
  double sigma = 1.0;
};

std::vector<std::pair<double, double>> holder_ratio(const HolderProbe& probe);

/// 1 / max grid ratio: the largest gamma the grid supports.
double holder_gamma_hat(const HolderProbe& probe);

/// True iff probe.gamma * Var <= excess^beta across the grid.
bool holder_check(const HolderProbe& probe);

/// Expected value of cos(a) under N(mu, 1), by adaptive quadrature over
/// mu +/- 8. Equals exp(-1/2) cos(mu) analytically.
double quadrature_risk_cosine(double mu);

/// Bias/variance study of the estimators on the sinusoidal-loss task:
/// logging policy N(0,1), evaluated policies N(shift, 1), deterministic loss
/// y(a) = cos(a). Bias is against the quadrature ground truth; variance is
/// across replications.
struct EstimatorStudyRow {
  double shift = 0.0;
  EstimatorVariant estimator = EstimatorVariant::kIps;
  long n = 0;
  int replications = 0;
  double bias = 0.0;
  double variance = 0.0;
  double truth = 0.0;
};

std::vector<EstimatorStudyRow> estimator_study(const std::vector<double>& shifts,
                                               const std::vector<EstimatorVariant>& estimators,
                                               long n, int replications, std::uint64_t seed);

/// Least-squares slope of log(excess) vs log(cumulative n) over the pooled
/// learning curves. Nonpositive excess values are dropped with a warning;
/// needs >= 3 surviving points.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points_used = 0;
  int points_dropped = 0;
};

RateFit rate_slope(const std::vector<std::pair<long, double>>& curve);
RateFit rate_slope(const std::vector<RunResult>& results);

/// On-policy Monte-Carlo risk with standard error (ground truth for biases
/// and skylines).
RiskEstimate mc_risk_oracle(const Environment& env, const PolicySpec& spec,
                            const ModelParams& theta, long n, Rng& rng);

/// Direct risk minimization through Nelder-Mead on a common-random-numbers
/// Monte-Carlo risk; the reference model for environments without a known
/// optimum.
ModelParams skyline_model(const Environment& env, const PolicySpec& spec,
                          const ModelParams& theta_init, long mc_samples, std::uint64_t seed,
                          double radius = 10.0);

/// Distance experiment: vary delta0 = |theta* - theta0| and report each
/// method's best final test loss over the exploration grid (a posteriori
/// sigma selection, median over seeds).
struct DistanceSweepCell {
  double delta0 = 0.0;
  Method method = Method::kScrm;
  double best_sigma = 0.0;
  double best_final_loss = 0.0;
};

struct DistanceSweepSettings {
  EnvSpec env;                         // GaussianQuadratic template
  PolicySpec policy;                   // sigma is overridden by the grid
  RolloutPlan plan;
  ObjectiveConfig objective;
  OptimizerConfig optimizer;
  std::vector<double> delta0_grid = {0.0, 0.5, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> sigma_grid = {0.1, 0.3, 1.0, 3.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::uint64_t master_seed = 0;
};

std::vector<DistanceSweepCell> distance_sweep(const DistanceSweepSettings& settings);

}  // namespace scrm

#endif  // SCRM_DIAGNOSTICS_HPP
