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

#include "scrm/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "scrm/math_util.hpp"

namespace scrm {

namespace {

void require_nonempty(const Batch& batch) {
  if (batch.interactions.empty()) throw EstimatorError("empty batch");
}

double checked_log_propensity(const Interaction& it) {
  if (!(it.propensity > 0.0)) throw EstimatorError("non-positive logged propensity");
  return std::log(it.propensity);
}

// Raw importance weight exp(log pi_theta - log propensity), with the
// declared-bound diagnostic.
double raw_weight(const PolicySpec& spec, double log_target, double log_propensity) {
  const double w = std::exp(log_target - log_propensity);
  if (w > spec.weight_bound)
    warn_rate_limited("estimator_weight", "importance weight " + std::to_string(w) +
                                              " exceeds declared bound W=" +
                                              std::to_string(spec.weight_bound));
  return w;
}

std::vector<double> ips_terms(const Batch& batch, const PolicySpec& spec,
                              const ModelParams& theta) {
  const auto log_target = target_log_densities(batch, spec, theta);
  std::vector<double> terms(log_target.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Interaction& it = batch.interactions[i];
    terms[i] = it.loss * raw_weight(spec, log_target[i], checked_log_propensity(it));
  }
  return terms;
}

std::vector<double> clipped_terms(const Batch& batch, const PolicySpec& spec,
                                  const ModelParams& theta, double alpha) {
  if (!(alpha > 0.0)) throw EstimatorError("clipped IPS requires alpha > 0");
  const auto log_target = target_log_densities(batch, spec, theta);
  std::vector<double> terms(log_target.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Interaction& it = batch.interactions[i];
    const double w = raw_weight(spec, log_target[i], checked_log_propensity(it));
    terms[i] = it.loss * std::min(w, alpha);
  }
  return terms;
}

std::vector<double> ix_weights(const Batch& batch, const PolicySpec& spec,
                               const ModelParams& theta, double alpha) {
  if (alpha < 0.0) throw EstimatorError("IPS-IX requires alpha >= 0");
  const auto log_target = target_log_densities(batch, spec, theta);
  std::vector<double> w(log_target.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = ix_weight(log_target[i], checked_log_propensity(batch.interactions[i]), alpha);
  return w;
}

}  // namespace

std::vector<double> target_log_densities(const Batch& batch, const PolicySpec& spec,
                                         const ModelParams& theta) {
  require_nonempty(batch);
  std::vector<double> out(batch.interactions.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Interaction& it = batch.interactions[i];
    out[i] = log_density(spec, theta, it.context, it.action);
  }
  return out;
}

double ix_weight(double log_target, double log_propensity, double alpha) {
  // pi_theta / (pi_b + alpha pi_theta) = exp(l_t - logsumexp(l_b, log(alpha) + l_t))
  if (alpha == 0.0) return std::exp(log_target - log_propensity);
  const double denom_log = logaddexp(log_propensity, std::log(alpha) + log_target);
  return std::exp(log_target - denom_log);
}

void spot_check_batch(const Batch& batch, const PolicySpec& spec, int samples) {
  require_nonempty(batch);
  const long n = batch.size();
  const long step = std::max<long>(1, n / std::max(1, samples));
  for (long i = 0; i < n; i += step) {
    const Interaction& it = batch.interactions[static_cast<std::size_t>(i)];
    const double expected = log_density(spec, batch.behavior_theta, it.context, it.action);
    if (std::abs(std::log(it.propensity) - expected) > 1e-9)
      throw EstimatorError("logged propensity inconsistent with behavior model at index " +
                           std::to_string(i));
  }
}

std::string estimator_name(EstimatorVariant variant) {
  switch (variant) {
    case EstimatorVariant::kIps:
      return "ips";
    case EstimatorVariant::kClippedIps:
      return "clipped_ips";
    case EstimatorVariant::kSnips:
      return "snips";
    case EstimatorVariant::kIpsIx:
      return "ips_ix";
  }
  throw Error("unknown estimator variant");
}

double ips_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta) {
  return canonical_mean(ips_terms(batch, spec, theta));
}

double clipped_ips_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                            double alpha) {
  return canonical_mean(clipped_terms(batch, spec, theta, alpha));
}

double snips_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta) {
  const auto log_target = target_log_densities(batch, spec, theta);
  std::vector<double> weighted(log_target.size());
  std::vector<double> weights(log_target.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Interaction& it = batch.interactions[i];
    weights[i] = raw_weight(spec, log_target[i], checked_log_propensity(it));
    weighted[i] = it.loss * weights[i];
  }
  const double denom = canonical_sum(std::move(weights));
  if (!(denom > 0.0)) throw EstimatorError("SNIPS weight sum is not positive");
  return canonical_sum(std::move(weighted)) / denom;
}

double ips_ix_estimate(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                       double alpha) {
  const auto w = ix_weights(batch, spec, theta, alpha);
  std::vector<double> terms(w.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = batch.interactions[i].loss * w[i];
  return canonical_mean(std::move(terms));
}

double empirical_variance_ips(const Batch& batch, const PolicySpec& spec,
                              const ModelParams& theta, double alpha) {
  const auto chi = clipped_terms(batch, spec, theta, alpha);
  if (chi.size() < 2) throw EstimatorError("variance estimator needs n >= 2");
  return canonical_sample_variance(chi);
}

double empirical_variance_ips_ix(const Batch& batch, const PolicySpec& spec,
                                 const ModelParams& theta, double alpha) {
  const auto w = ix_weights(batch, spec, theta, alpha);
  if (w.size() < 2) throw EstimatorError("variance estimator needs n >= 2");
  std::vector<double> zeta(w.size());
  for (std::size_t i = 0; i < zeta.size(); ++i)
    zeta[i] = (w[i] - 1.0) * batch.interactions[i].loss;
  return canonical_sample_variance(zeta);
}

double mis_weight(std::span<const Batch> batches, const PolicySpec& spec, std::size_t t,
                  const Vec& x, const Action& a, MisWeights weights) {
  if (batches.empty()) throw EstimatorError("MIS needs at least one batch");
  if (t >= batches.size()) throw EstimatorError("MIS source index out of range");
  double total_n = 0.0;
  for (const Batch& b : batches) total_n += static_cast<double>(b.size());
  switch (weights) {
    case MisWeights::kNaive:
      return static_cast<double>(batches[t].size()) / total_n;
    case MisWeights::kBalance: {
      // omega_t ~ n_t pi_{theta_t}(a|x); normalize over sources in log space.
      std::vector<double> logs(batches.size());
      for (std::size_t l = 0; l < batches.size(); ++l)
        logs[l] = std::log(static_cast<double>(batches[l].size())) +
                  log_density(spec, batches[l].behavior_theta, x, a);
      double lse = -INFINITY;
      for (double v : logs) lse = logaddexp(lse, v);
      return std::exp(logs[t] - lse);
    }
    case MisWeights::kNone:
      break;
  }
  throw EstimatorError("MIS weight rule must be naive or balance");
}

double mis_estimate(std::span<const Batch> batches, const PolicySpec& spec,
                    const ModelParams& theta, MisWeights weights) {
  if (batches.empty()) throw EstimatorError("MIS needs at least one batch");
  std::vector<double> terms;
  for (std::size_t t = 0; t < batches.size(); ++t) {
    const Batch& b = batches[t];
    require_nonempty(b);
    const auto log_target = target_log_densities(b, spec, theta);
    const double inv_n = 1.0 / static_cast<double>(b.size());
    for (std::size_t i = 0; i < log_target.size(); ++i) {
      const Interaction& it = b.interactions[i];
      const double omega = mis_weight(batches, spec, t, it.context, it.action, weights);
      const double w = raw_weight(spec, log_target[i], checked_log_propensity(it));
      terms.push_back(inv_n * omega * it.loss * w);
    }
  }
  return canonical_sum(std::move(terms));
}

double mis_cross_covariance(const Batch& p, const Batch& q, const PolicySpec& spec,
                            const ModelParams& theta) {
  if (p.size() != q.size())
    throw EstimatorError("cross-batch covariance needs equal batch sizes");
  const auto rp = ips_terms(p, spec, theta);
  const auto rq = ips_terms(q, spec, theta);
  const double mp = canonical_mean(rp);
  const double mq = canonical_mean(rq);
  std::vector<double> prods(rp.size());
  for (std::size_t k = 0; k < prods.size(); ++k) prods[k] = (rp[k] - mp) * (rq[k] - mq);
  return canonical_sum(std::move(prods)) / static_cast<double>(rp.size());
}

double mis_variance_naive(std::span<const Batch> batches, const PolicySpec& spec,
                          const ModelParams& theta) {
  if (batches.empty()) throw EstimatorError("MIS variance needs at least one batch");
  const long nb = batches.front().size();
  double n_total = 0.0;
  for (const Batch& b : batches) {
    if (b.size() != nb)
      throw EstimatorError("naive-MIS variance formula requires equal batch sizes");
    if (b.size() < 2) throw EstimatorError("variance estimator needs n >= 2 per batch");
    n_total += static_cast<double>(b.size());
  }
  double acc = 0.0;
  for (const Batch& b : batches) {
    // Vhat(r^t): variance-of-mean estimate, 1/(n_t (n_t - 1)) scaling.
    const auto r = ips_terms(b, spec, theta);
    const double var = canonical_sample_variance(r);  // 1/(n-1) scaling
    acc += var / static_cast<double>(b.size());
  }
  for (std::size_t p = 0; p < batches.size(); ++p)
    for (std::size_t q = p + 1; q < batches.size(); ++q)
      acc += 2.0 * static_cast<double>(batches[p].size()) *
             static_cast<double>(batches[q].size()) *
             mis_cross_covariance(batches[p], batches[q], spec, theta);
  return acc / (n_total * n_total);
}

double bottou_clip_alpha(const Batch& batch, const PolicySpec& spec, const ModelParams& theta,
                         int rank) {
  require_nonempty(batch);
  if (rank < 1) throw EstimatorError("clip rank must be >= 1");
  const auto log_target = target_log_densities(batch, spec, theta);
  std::vector<double> weights(log_target.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    weights[i] = std::exp(log_target[i] - checked_log_propensity(batch.interactions[i]));
  std::sort(weights.begin(), weights.end(), std::greater<>());
  const std::size_t idx = std::min<std::size_t>(weights.size(), static_cast<std::size_t>(rank)) - 1;
  return std::max(weights[idx], 1e-12);
}

double estimate(const EstimatorConfig& config, const Batch& batch, const PolicySpec& spec,
                const ModelParams& theta) {
  switch (config.variant) {
    case EstimatorVariant::kIps:
      return ips_estimate(batch, spec, theta);
    case EstimatorVariant::kClippedIps: {
      const double alpha =
          config.alpha > 0.0 ? config.alpha : bottou_clip_alpha(batch, spec, theta);
      return clipped_ips_estimate(batch, spec, theta, alpha);
    }
    case EstimatorVariant::kSnips:
      return snips_estimate(batch, spec, theta);
    case EstimatorVariant::kIpsIx: {
      const double alpha =
          config.alpha > 0.0 ? config.alpha : 1.0 / static_cast<double>(batch.size());
      return ips_ix_estimate(batch, spec, theta, alpha);
    }
  }
  throw Error("unknown estimator variant");
}

}  // namespace scrm
