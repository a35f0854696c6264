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

#ifndef SCRM_ENV_HPP
#define SCRM_ENV_HPP

#include <atomic>
#include <cstdint>
#include <optional>
#include <vector>

#include "scrm/policy.hpp"
#include "scrm/rng.hpp"

namespace scrm {

/// One logged tuple of bandit feedback. Environment-generated losses lie in
/// [-1, 0]; synthetic diagnostic batches may carry other bounded losses.
struct Interaction {
  Vec context;
  Action action;
  double loss = 0.0;
  double propensity = 0.0;
};

enum class EnvKind {
  kGaussianQuadratic,   // non-contextual Gaussian action, quadratic loss
  kPricing,             // personalized pricing, revenue p*(a(x) - b(x)p + noise)
  kPotential,           // advertising potentials, piecewise bid reward
  kSyntheticMultilabel  // linear-logit teacher labels, Hamming loss
};

struct EnvSpec {
  EnvKind kind = EnvKind::kGaussianQuadratic;

  // GaussianQuadratic
  double theta_star = 1.0;
  double loss_sigma = 0.3;  // std-dev of the loss noise around theta_star

  // Pricing
  int context_dim = 10;  // k, context in [1,2]^k
  int active_dims = 3;   // l, coordinates that drive the demand curve

  // Potential
  double potential_mean_low = 1.0;
  double potential_mean_high = 3.0;
  double potential_sigma = 0.5;

  // SyntheticMultilabel
  int label_bits = 4;
  int feature_dim = 20;
  std::uint64_t teacher_seed = 0;
};

void validate_spec(const EnvSpec& spec);

struct RiskEstimate {
  double value = 0.0;
  double stderror = 0.0;
};

// Raw per-environment formulas, exposed for direct unit checks. The
// environment maps their outputs into losses in [-1, 0].
double gaussian_quadratic_raw_loss(double action, double target);
double pricing_raw_revenue(double xbar, double price, double noise);
double potential_raw_reward(double potential, double bid);
double hamming_loss(const std::vector<std::uint8_t>& action_bits,
                    const std::vector<std::uint8_t>& labels);

/// A stationary synthetic data-generating process. All sampling is pure
/// given an explicit random stream; the clamp counters are the only mutable
/// state and exist for diagnostics.
class Environment {
 public:
  explicit Environment(EnvSpec spec);

  const EnvSpec& spec() const { return spec_; }
  int context_dim() const;

  Vec sample_context(Rng& rng) const;

  /// Normalized loss in [-1, 0]. The rare clamp needed to enforce the bound
  /// (quadratic losses above 0, pricing noise outliers) is counted.
  double sample_loss(const Vec& x, const Action& a, Rng& rng) const;

  bool has_closed_form_risk() const { return spec_.kind == EnvKind::kGaussianQuadratic; }

  /// Exact expected risk for GaussianQuadratic with a non-contextual
  /// GaussianLinear policy: (theta - theta*)^2 + sigma^2 + sigma*^2 - 1.
  /// Ignores the loss clamp at 0, whose probability is counted separately.
  double closed_form_risk(const PolicySpec& policy, const ModelParams& theta) const;

  /// On-policy Monte-Carlo risk with standard error.
  RiskEstimate monte_carlo_risk(const PolicySpec& policy, const ModelParams& theta, long n,
                                Rng& rng) const;

  /// theta* when known in closed form (GaussianQuadratic), nullopt otherwise.
  std::optional<ModelParams> optimal_model() const;

  /// Expected dimension of a compatible parameter vector for the family.
  int param_dim(const PolicySpec& policy) const;

  /// Fraction of emitted losses that needed clamping into [-1, 0].
  double clamp_fraction() const;
  void reset_clamp_stats() const;

 private:
  double normalize_reward(double raw, double lo, double hi) const;

  EnvSpec spec_;
  Eigen::MatrixXd teacher_;  // multilabel teacher logits, one row per label bit
  mutable std::atomic<std::uint64_t> losses_emitted_{0};
  mutable std::atomic<std::uint64_t> losses_clamped_{0};
};

/// Convenience wrapper matching the closed_form / monte_carlo mode split.
struct RiskMode {
  enum Kind { kClosedForm, kMonteCarlo } kind = kClosedForm;
  long samples = 100000;
};
RiskEstimate true_risk(const Environment& env, const PolicySpec& policy,
                       const ModelParams& theta, const RiskMode& mode, Rng* rng = nullptr);

}  // namespace scrm

#endif  // SCRM_ENV_HPP
