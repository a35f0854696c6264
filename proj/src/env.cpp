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

#include "scrm/env.hpp"

#include <cmath>
#include <string>

#include "scrm/math_util.hpp"

namespace scrm {

namespace {

// Pricing reward bounds used for the affine map into [-1, 0]. The noiseless
// revenue over xbar in [1,2] and the price box stays well inside; the
// Gaussian price noise escapes only in the far tails, which get clamped.
constexpr double kPriceBoxLo = 0.0;
constexpr double kPriceBoxHi = 5.0;
constexpr double kPricingRewardLo = -20.0;
constexpr double kPricingRewardHi = 30.0;

// Potential reward is exactly in [-0.1, 1] by construction.
constexpr double kPotentialRewardLo = -0.1;
constexpr double kPotentialRewardHi = 1.0;

constexpr double kTeacherGain = 2.0;

double pricing_xbar(const Vec& x, int active_dims) {
  double s = 0.0;
  for (int i = 0; i < active_dims; ++i) s += x[i];
  return s / active_dims;
}

}  // namespace

void validate_spec(const EnvSpec& spec) {
  switch (spec.kind) {
    case EnvKind::kGaussianQuadratic:
      if (spec.loss_sigma < 0.0) throw ConfigError("env.loss_sigma must be >= 0");
      break;
    case EnvKind::kPricing:
      if (spec.context_dim <= 0) throw ConfigError("env.context_dim must be positive");
      if (spec.active_dims <= 0 || spec.active_dims > spec.context_dim)
        throw ConfigError("env.active_dims must be in [1, context_dim]");
      break;
    case EnvKind::kPotential:
      if (spec.potential_sigma <= 0.0) throw ConfigError("env.potential_sigma must be > 0");
      break;
    case EnvKind::kSyntheticMultilabel:
      if (spec.label_bits <= 0 || spec.label_bits > 12)
        throw ConfigError("env.label_bits must be in [1, 12]");
      if (spec.feature_dim <= 0) throw ConfigError("env.feature_dim must be positive");
      break;
  }
}

double gaussian_quadratic_raw_loss(double action, double target) {
  const double d = action - target;
  return d * d - 1.0;
}

double pricing_raw_revenue(double xbar, double price, double noise) {
  const double demand_a = 2.0 * xbar * xbar;
  const double demand_b = 0.6 * xbar;
  return price * (demand_a - demand_b * price + noise);
}

double potential_raw_reward(double potential, double bid) {
  const double linear =
      bid < potential ? bid / potential : 0.5 * (potential - bid) + 1.0;
  return std::max(linear, -0.1);
}

double hamming_loss(const std::vector<std::uint8_t>& action_bits,
                    const std::vector<std::uint8_t>& labels) {
  if (action_bits.size() != labels.size())
    throw DimensionError("hamming_loss: bit-vector sizes differ");
  int mismatches = 0;
  for (std::size_t j = 0; j < labels.size(); ++j)
    mismatches += (action_bits[j] != labels[j]) ? 1 : 0;
  return static_cast<double>(mismatches) / static_cast<double>(labels.size());
}

Environment::Environment(EnvSpec spec) : spec_(spec) {
  validate_spec(spec_);
  if (spec_.kind == EnvKind::kSyntheticMultilabel) {
    Rng rng(substream(spec_.teacher_seed, static_cast<std::uint64_t>(StreamPurpose::kTeacher)));
    teacher_.resize(spec_.label_bits, spec_.feature_dim);
    for (int j = 0; j < spec_.label_bits; ++j) {
      for (int i = 0; i < spec_.feature_dim; ++i) teacher_(j, i) = rng.normal();
      teacher_.row(j) /= teacher_.row(j).norm();
    }
  }
}

int Environment::context_dim() const {
  switch (spec_.kind) {
    case EnvKind::kGaussianQuadratic:
      return 0;
    case EnvKind::kPricing:
      return spec_.context_dim;
    case EnvKind::kPotential:
      return 2;  // [bias, observed potential]
    case EnvKind::kSyntheticMultilabel:
      return spec_.feature_dim;
  }
  throw Error("unknown environment kind");
}

Vec Environment::sample_context(Rng& rng) const {
  switch (spec_.kind) {
    case EnvKind::kGaussianQuadratic:
      return Vec(0);
    case EnvKind::kPricing: {
      Vec x(spec_.context_dim);
      for (int i = 0; i < spec_.context_dim; ++i) x[i] = rng.uniform(1.0, 2.0);
      return x;
    }
    case EnvKind::kPotential: {
      const bool high = rng.uniform01() < 0.5;
      const double mean = high ? spec_.potential_mean_high : spec_.potential_mean_low;
      Vec x(2);
      x[0] = 1.0;
      x[1] = rng.normal(mean, spec_.potential_sigma);
      return x;
    }
    case EnvKind::kSyntheticMultilabel: {
      Vec x(spec_.feature_dim);
      for (int i = 0; i < spec_.feature_dim; ++i) x[i] = rng.normal();
      return x;
    }
  }
  throw Error("unknown environment kind");
}

double Environment::normalize_reward(double raw, double lo, double hi) const {
  double y = -(raw - lo) / (hi - lo);
  losses_emitted_.fetch_add(1, std::memory_order_relaxed);
  if (y < -1.0 || y > 0.0) {
    losses_clamped_.fetch_add(1, std::memory_order_relaxed);
    y = std::min(0.0, std::max(-1.0, y));
  }
  return y;
}

double Environment::sample_loss(const Vec& x, const Action& a, Rng& rng) const {
  switch (spec_.kind) {
    case EnvKind::kGaussianQuadratic: {
      if (a.kind != ActionKind::kContinuous)
        throw DimensionError("GaussianQuadratic expects a continuous action");
      const double target = spec_.theta_star + spec_.loss_sigma * rng.normal();
      const double raw = gaussian_quadratic_raw_loss(a.value, target);
      losses_emitted_.fetch_add(1, std::memory_order_relaxed);
      if (raw > 0.0) {
        losses_clamped_.fetch_add(1, std::memory_order_relaxed);
        return 0.0;
      }
      return raw;  // already >= -1
    }
    case EnvKind::kPricing: {
      if (a.kind != ActionKind::kContinuous)
        throw DimensionError("Pricing expects a continuous action");
      const double xbar = pricing_xbar(x, spec_.active_dims);
      const double price = std::min(kPriceBoxHi, std::max(kPriceBoxLo, a.value));
      const double raw = pricing_raw_revenue(xbar, price, rng.normal());
      return normalize_reward(raw, kPricingRewardLo, kPricingRewardHi);
    }
    case EnvKind::kPotential: {
      if (a.kind != ActionKind::kContinuous)
        throw DimensionError("Potential expects a continuous action");
      const double raw = potential_raw_reward(x[1], a.value);
      return normalize_reward(raw, kPotentialRewardLo, kPotentialRewardHi);
    }
    case EnvKind::kSyntheticMultilabel: {
      if (a.kind != ActionKind::kDiscrete ||
          static_cast<int>(a.bits.size()) != spec_.label_bits)
        throw DimensionError("SyntheticMultilabel expects a K-bit discrete action");
      std::vector<std::uint8_t> labels(static_cast<std::size_t>(spec_.label_bits));
      for (int j = 0; j < spec_.label_bits; ++j) {
        const double p = sigmoid(kTeacherGain * teacher_.row(j).dot(x));
        labels[static_cast<std::size_t>(j)] = rng.bernoulli(p) ? 1 : 0;
      }
      losses_emitted_.fetch_add(1, std::memory_order_relaxed);
      return hamming_loss(a.bits, labels) - 1.0;  // Hamming in [0,1] mapped to [-1,0]
    }
  }
  throw Error("unknown environment kind");
}

double Environment::closed_form_risk(const PolicySpec& policy, const ModelParams& theta) const {
  if (spec_.kind != EnvKind::kGaussianQuadratic)
    throw Error("closed-form risk is only available for GaussianQuadratic");
  if (policy.family != PolicyFamily::kGaussianLinear || theta.dim() != 1)
    throw Error("closed-form risk wants a non-contextual GaussianLinear policy");
  const double d = theta.theta[0] - spec_.theta_star;
  return d * d + policy.sigma * policy.sigma + spec_.loss_sigma * spec_.loss_sigma - 1.0;
}

RiskEstimate Environment::monte_carlo_risk(const PolicySpec& policy, const ModelParams& theta,
                                           long n, Rng& rng) const {
  if (n < 1) throw Error("monte_carlo_risk: n must be >= 1");
  double sum = 0.0;
  double sumsq = 0.0;
  for (long i = 0; i < n; ++i) {
    const Vec x = sample_context(rng);
    const SampledAction sa = sample_action(policy, theta, x, rng);
    const double y = sample_loss(x, sa.action, rng);
    sum += y;
    sumsq += y * y;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
  RiskEstimate est;
  est.value = mean;
  est.stderror = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
  return est;
}

std::optional<ModelParams> Environment::optimal_model() const {
  if (spec_.kind == EnvKind::kGaussianQuadratic) return ModelParams::scalar(spec_.theta_star);
  return std::nullopt;
}

int Environment::param_dim(const PolicySpec& policy) const {
  const int ctx = context_dim();
  const int p = ctx == 0 ? 1 : ctx;
  if (policy.family == PolicyFamily::kSoftmaxKronecker) return p * policy.action_bits;
  return p;
}

double Environment::clamp_fraction() const {
  const auto total = losses_emitted_.load(std::memory_order_relaxed);
  if (total == 0) return 0.0;
  return static_cast<double>(losses_clamped_.load(std::memory_order_relaxed)) /
         static_cast<double>(total);
}

void Environment::reset_clamp_stats() const {
  losses_emitted_.store(0, std::memory_order_relaxed);
  losses_clamped_.store(0, std::memory_order_relaxed);
}

RiskEstimate true_risk(const Environment& env, const PolicySpec& policy,
                       const ModelParams& theta, const RiskMode& mode, Rng* rng) {
  if (mode.kind == RiskMode::kClosedForm)
    return RiskEstimate{env.closed_form_risk(policy, theta), 0.0};
  if (rng == nullptr) throw Error("true_risk: Monte-Carlo mode needs a random stream");
  return env.monte_carlo_risk(policy, theta, mode.samples, *rng);
}

}  // namespace scrm
