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

#ifndef SCRM_ESTIMATORS_HPP
#define SCRM_ESTIMATORS_HPP

#include <span>
#include <string>
#include <vector>

#include "scrm/env.hpp"
#include "scrm/policy.hpp"

namespace scrm {

/// One rollout's logged interactions. Propensities are stored per
/// interaction; behavior_theta is metadata for spot checks and MIS weights.
struct Batch {
  std::vector<Interaction> interactions;
  ModelParams behavior_theta;
  int rollout_index = 0;

  long size() const { return static_cast<long>(interactions.size()); }
};

/// Checks a few logged propensities against the behavior model's density.
void spot_check_batch(const Batch& batch, const PolicySpec& spec, int samples = 5);

enum class EstimatorVariant { kIps, kClippedIps, kSnips, kIpsIx };
enum class MisWeights { kNone, kNaive, kBalance };

struct EstimatorConfig {
  EstimatorVariant variant = EstimatorVariant::kIps;
  double alpha = 0.0;  // clip level (ClippedIPS) or smoothing (IPS-IX)
  MisWeights mis_weights = MisWeights::kNone;
};

std::string estimator_name(EstimatorVariant variant);

/// Plain inverse-propensity estimate (1/n) sum y_i w_i.
double ips_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta);

/// Clipped IPS (1/n) sum y_i min(w_i, alpha). Requires alpha > 0.
double clipped_ips_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                            double alpha);

/// Self-normalized estimate (sum y_i w_i) / (sum w_i).
double snips_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta);

/// Implicit-exploration estimate (1/n) sum y_i pi_theta / (pi_i + alpha pi_theta).
double ips_ix_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                       double alpha);

/// Unbiased sample variance of the clipped terms chi_i = y_i min(w_i, alpha).
double empirical_variance_ips(const Batch& batch, const PolicySpec& spec,
                              const ModelParams& theta, double alpha);

/// Sample variance of the control-variate terms
/// zeta_i = (pi_theta / (pi_i + alpha pi_theta) - 1) y_i; exactly zero
/// on-policy at alpha = 0.
double empirical_variance_ips_ix(const Batch& batch, const PolicySpec& spec,
                                 const ModelParams& theta, double alpha);

/// Partition-of-unity weight of source batch t at a logged point. Naive
/// weights are n_t / n; balance-heuristic weights are proportional to
/// n_t pi_{theta_t}(a|x).
double mis_weight(std::span<const Batch> batches, const PolicySpec& spec, std::size_t t,
                  const Vec& x, const Action& a, MisWeights weights);

/// Multiple-importance-sampling risk estimate over several behavior batches.
double mis_estimate(std::span<const Batch> batches, const PolicySpec& spec,
                    const ModelParams& theta, MisWeights weights);

/// Index-paired cross-batch covariance (1/n_p) sum_k (r^p_k - rbar_p)(r^q_k - rbar_q)
/// of the IPS terms r_i = y_i w_i. Requires equal batch sizes.
double mis_cross_covariance(const Batch& p, const Batch& q, const PolicySpec& spec,
                            const ModelParams& theta);

/// Variance estimate of the naive-MIS mean, as printed in its source:
/// (1/n^2) [ sum_t Vhat(r^t) + 2 sum_{p<q} n_p n_q Cov(r^p, r^q) ] with
/// Vhat(r^t) the variance-of-mean estimate of batch t. Requires equal batch
/// sizes.
double mis_variance_naive(std::span<const Batch> batches, const PolicySpec& spec,
                          const ModelParams& theta);

/// Order-statistic clipping heuristic: alpha is the rank-th largest
/// importance weight in the batch (rank 5 by default).
double bottou_clip_alpha(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                         int rank = 5);

/// Dispatch on the configured variant with each estimator's benchmark
/// heuristic: alpha == 0 means the order-statistic clip level for ClippedIPS
/// and 1/n for IPS-IX. Call the estimator functions directly for exact
/// alpha = 0 semantics.
double estimate(const EstimatorConfig& config, const Batch& batch, const PolicySpec& spec,
                const ModelParams& theta);

// Per-sample building blocks shared with the objective module.
std::vector<double> target_log_densities(const Batch& batch, const PolicySpec& spec,
                                         const ModelParams& theta);
double ix_weight(double log_target, double log_propensity, double alpha);

}  // namespace scrm

#endif  // SCRM_ESTIMATORS_HPP
