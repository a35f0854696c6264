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

#ifndef SCRM_POLICY_HPP
#define SCRM_POLICY_HPP

#include <cstdint>
#include <vector>

#include "scrm/common.hpp"
#include "scrm/rng.hpp"

namespace scrm {

class Rng;

/// Parameter vector of a policy. Entries must be finite; the optimizer keeps
/// the Euclidean norm inside its projection radius.
struct ModelParams {
  Vec theta;

  ModelParams() = default;
  explicit ModelParams(Vec t) : theta(std::move(t)) {}
  static ModelParams scalar(double v) {
    Vec t(1);
    t[0] = v;
    return ModelParams(t);
  }
  int dim() const { return static_cast<int>(theta.size()); }
};

/// Checks that every entry is finite; throws otherwise.
void validate_params(const ModelParams& params);

enum class PolicyFamily {
  kGaussianLinear,   // N(theta^T x, sigma^2) over a real-valued action
  kLognormal,        // log-space mean theta^T x, fixed log-space sigma
  kSoftmaxKronecker  // bit-vector actions, logits theta^T (x (x) a), eps-greedy mix
};

struct PolicySpec {
  PolicyFamily family = PolicyFamily::kGaussianLinear;
  double sigma = 1.0;          // std-dev for the continuous families
  double epsilon = 0.0;        // uniform mixing weight, discrete family only
  int action_bits = 0;         // K, discrete family only
  double weight_bound = 100.0; // declared W of Assumption-style bounded weights
};

/// Throws unless the spec's scalar fields are in range for its family.
void validate_spec(const PolicySpec& spec);

enum class ActionKind { kContinuous, kDiscrete };

/// Either a scalar real action or a bit vector of length K.
struct Action {
  ActionKind kind = ActionKind::kContinuous;
  double value = 0.0;
  std::vector<std::uint8_t> bits;

  static Action continuous(double v) {
    Action a;
    a.kind = ActionKind::kContinuous;
    a.value = v;
    return a;
  }
  static Action discrete(std::vector<std::uint8_t> b) {
    Action a;
    a.kind = ActionKind::kDiscrete;
    a.bits = std::move(b);
    return a;
  }
};

struct SampledAction {
  Action action;
  double propensity = 0.0;  // density (continuous) or mass (discrete) at the action
};

/// Log density (or log mass) of the action under the policy.
///
/// GaussianLinear / Lognormal use mean theta^T x; an empty context stands in
/// for a constant bias feature, so theta must then be one-dimensional. The
/// discrete family mixes the softmax with uniform mass epsilon / 2^K at the
/// distribution level, and the mixed value is what gets logged as propensity.
double log_density(const PolicySpec& spec, const ModelParams& theta, const Vec& x,
                   const Action& a);

/// Samples an action and returns it with its exact propensity (computed
/// through the same code path as log_density).
SampledAction sample_action(const PolicySpec& spec, const ModelParams& theta, const Vec& x,
                            Rng& rng);

/// Analytic score function: grad_theta log pi_theta(a | x).
Vec grad_log_density(const PolicySpec& spec, const ModelParams& theta, const Vec& x,
                     const Action& a);

/// pi_num(a|x) / pi_den(a|x), formed in log space. Throws when the
/// denominator density underflows below 1e-300; weights above the declared
/// bound W only emit a diagnostic, they are never truncated.
double importance_weight(const PolicySpec& spec, const ModelParams& theta_num,
                         const ModelParams& theta_den, const Vec& x, const Action& a);

/// All 2^K bit-vector actions in lexicographic order (bit 0 fastest). K <= 20.
std::vector<Action> all_discrete_actions(int action_bits);

}  // namespace scrm

#endif  // SCRM_POLICY_HPP
