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

#include "scrm/policy.hpp"

#include <cmath>
#include <string>

#include "scrm/math_util.hpp"

namespace scrm {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2*pi)
constexpr double kLog2 = 0.69314718055994530942;
constexpr double kMinDensity = 1e-300;

// theta^T x with the empty-context convention (bias-only model).
double linear_mean(const ModelParams& theta, const Vec& x) {
  if (x.size() == 0) {
    if (theta.dim() != 1)
      throw DimensionError("empty context requires a 1-d parameter, got d=" +
                           std::to_string(theta.dim()));
    return theta.theta[0];
  }
  if (theta.dim() != x.size())
    throw DimensionError("parameter dimension " + std::to_string(theta.dim()) +
                         " does not match context dimension " + std::to_string(x.size()));
  return theta.theta.dot(x);
}

// Feature vector: the context itself, or a constant bias for empty contexts.
Vec context_features(const Vec& x) {
  if (x.size() == 0) {
    Vec phi(1);
    phi[0] = 1.0;
    return phi;
  }
  return x;
}

Vec continuous_features(const ModelParams& theta, const Vec& x) {
  Vec phi = context_features(x);
  if (theta.dim() != phi.size())
    throw DimensionError("parameter dimension " + std::to_string(theta.dim()) +
                         " does not match feature dimension " + std::to_string(phi.size()));
  return phi;
}

void require_continuous(const Action& a) {
  if (a.kind != ActionKind::kContinuous)
    throw DimensionError("continuous policy family given a discrete action");
}

// Per-bit logits s_j = theta_j-block^T phi(x). The Kronecker feature map is
// laid out as one block of context features per action bit.
Vec bit_scores(const PolicySpec& spec, const ModelParams& theta, const Vec& phi) {
  const int k = spec.action_bits;
  const int p = static_cast<int>(phi.size());
  if (theta.dim() != k * p)
    throw DimensionError("discrete family wants d = K*p = " + std::to_string(k * p) +
                         ", got d=" + std::to_string(theta.dim()));
  Vec s(k);
  for (int j = 0; j < k; ++j) s[j] = theta.theta.segment(j * p, p).dot(phi);
  return s;
}

// The softmax over 2^K actions with Kronecker logits factorizes into K
// independent Bernoulli bits with success probability sigmoid(s_j).
double softmax_base_log_mass(const Vec& scores, const std::vector<std::uint8_t>& bits) {
  double lp = 0.0;
  for (int j = 0; j < scores.size(); ++j) {
    const double s = scores[j];
    lp += bits[static_cast<std::size_t>(j)] ? -softplus(-s) : -softplus(s);
  }
  return lp;
}

double discrete_log_mass(const PolicySpec& spec, const Vec& scores,
                         const std::vector<std::uint8_t>& bits) {
  const double base = softmax_base_log_mass(scores, bits);
  if (spec.epsilon == 0.0) return base;
  const double log_uniform = -spec.action_bits * kLog2;
  return logaddexp(std::log1p(-spec.epsilon) + base, std::log(spec.epsilon) + log_uniform);
}

void require_discrete(const PolicySpec& spec, const Action& a) {
  if (a.kind != ActionKind::kDiscrete)
    throw DimensionError("discrete policy family given a continuous action");
  if (static_cast<int>(a.bits.size()) != spec.action_bits)
    throw DimensionError("action has " + std::to_string(a.bits.size()) + " bits, expected " +
                         std::to_string(spec.action_bits));
}

}  // namespace

void validate_params(const ModelParams& params) {
  if (params.dim() == 0) throw DimensionError("empty parameter vector");
  if (!params.theta.allFinite()) throw Error("parameter vector has non-finite entries");
}

void validate_spec(const PolicySpec& spec) {
  if (spec.family != PolicyFamily::kSoftmaxKronecker && spec.sigma <= 0.0)
    throw ConfigError("policy.sigma must be > 0 for continuous families");
  if (spec.family == PolicyFamily::kSoftmaxKronecker) {
    if (spec.epsilon < 0.0 || spec.epsilon >= 1.0)
      throw ConfigError("policy.epsilon must lie in [0, 1)");
    if (spec.action_bits <= 0) throw ConfigError("policy.action_bits must be positive");
  }
  if (spec.weight_bound < 1.0) throw ConfigError("policy.weight_bound must be >= 1");
}

double log_density(const PolicySpec& spec, const ModelParams& theta, const Vec& x,
                   const Action& a) {
  switch (spec.family) {
    case PolicyFamily::kGaussianLinear: {
      require_continuous(a);
      const double mu = linear_mean(theta, x);
      const double z = (a.value - mu) / spec.sigma;
      return -kLogSqrt2Pi - std::log(spec.sigma) - 0.5 * z * z;
    }
    case PolicyFamily::kLognormal: {
      require_continuous(a);
      if (a.value <= 0.0) throw Error("lognormal action must be positive");
      const double eta = linear_mean(theta, x);
      const double la = std::log(a.value);
      const double z = (la - eta) / spec.sigma;
      return -la - kLogSqrt2Pi - std::log(spec.sigma) - 0.5 * z * z;
    }
    case PolicyFamily::kSoftmaxKronecker: {
      require_discrete(spec, a);
      const Vec phi = context_features(theta, x);
      // reuse via bit_scores; theta dim is checked there
      const Vec scores = bit_scores(spec, theta, phi);
      return discrete_log_mass(spec, scores, a.bits);
    }
  }
  throw Error("unknown policy family");
}

SampledAction sample_action(const PolicySpec& spec, const ModelParams& theta, const Vec& x,
                            Rng& rng) {
  Action a;
  switch (spec.family) {
    case PolicyFamily::kGaussianLinear:
      a = Action::continuous(linear_mean(theta, x) + spec.sigma * rng.normal());
      break;
    case PolicyFamily::kLognormal:
      a = Action::continuous(std::exp(linear_mean(theta, x) + spec.sigma * rng.normal()));
      break;
    case PolicyFamily::kSoftmaxKronecker: {
      const Vec phi = context_features(theta, x);
      const Vec scores = bit_scores(spec, theta, phi);
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(spec.action_bits));
      const bool uniform_branch = spec.epsilon > 0.0 && rng.uniform01() < spec.epsilon;
      for (int j = 0; j < spec.action_bits; ++j) {
        const double p = uniform_branch ? 0.5 : sigmoid(scores[j]);
        bits[static_cast<std::size_t>(j)] = rng.bernoulli(p) ? 1 : 0;
      }
      a = Action::discrete(std::move(bits));
      break;
    }
    default:
      throw Error("unknown policy family");
  }
  return SampledAction{a, std::exp(log_density(spec, theta, x, a))};
}

Vec grad_log_density(const PolicySpec& spec, const ModelParams& theta, const Vec& x,
                     const Action& a) {
  switch (spec.family) {
    case PolicyFamily::kGaussianLinear: {
      require_continuous(a);
      const Vec phi = context_features(theta, x);
      const double mu = theta.theta.dot(phi);
      return ((a.value - mu) / (spec.sigma * spec.sigma)) * phi;
    }
    case PolicyFamily::kLognormal: {
      require_continuous(a);
      if (a.value <= 0.0) throw Error("lognormal action must be positive");
      const Vec phi = context_features(theta, x);
      const double eta = theta.theta.dot(phi);
      return ((std::log(a.value) - eta) / (spec.sigma * spec.sigma)) * phi;
    }
    case PolicyFamily::kSoftmaxKronecker: {
      require_discrete(spec, a);
      const Vec phi = context_features(theta, x);
      const Vec scores = bit_scores(spec, theta, phi);
      const int k = spec.action_bits;
      const int p = static_cast<int>(phi.size());
      Vec base_grad(k * p);
      for (int j = 0; j < k; ++j)
        base_grad.segment(j * p, p) =
            (static_cast<double>(a.bits[static_cast<std::size_t>(j)]) - sigmoid(scores[j])) * phi;
      if (spec.epsilon == 0.0) return base_grad;
      // grad of log((1-eps) pi + eps/|A|) = (1-eps) pi / pi_mixed * grad log pi
      const double base_log = softmax_base_log_mass(scores, a.bits);
      const double mixed_log = discrete_log_mass(spec, scores, a.bits);
      const double factor = (1.0 - spec.epsilon) * std::exp(base_log - mixed_log);
      return factor * base_grad;
    }
  }
  throw Error("unknown policy family");
}

double importance_weight(const PolicySpec& spec, const ModelParams& theta_num,
                         const ModelParams& theta_den, const Vec& x, const Action& a) {
  const double log_num = log_density(spec, theta_num, x, a);
  const double log_den = log_density(spec, theta_den, x, a);
  if (log_den < std::log(kMinDensity))
    throw EstimatorError("denominator propensity underflow (< 1e-300)");
  const double w = std::exp(log_num - log_den);
  if (w > spec.weight_bound)
    warn_rate_limited("importance_weight",
                      "importance weight " + std::to_string(w) + " exceeds declared bound W=" +
                          std::to_string(spec.weight_bound));
  return w;
}

std::vector<Action> all_discrete_actions(int action_bits) {
  if (action_bits <= 0 || action_bits > 20) throw Error("all_discrete_actions: K out of range");
  const std::size_t count = std::size_t{1} << action_bits;
  std::vector<Action> actions;
  actions.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(action_bits));
    for (int j = 0; j < action_bits; ++j) bits[static_cast<std::size_t>(j)] = (code >> j) & 1u;
    actions.push_back(Action::discrete(std::move(bits)));
  }
  return actions;
}

}  // namespace scrm
