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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "scrm/policy.hpp"

using namespace scrm;
using namespace scrm::testing;

namespace {

PolicySpec gaussian_spec(double sigma) {
  PolicySpec spec;
  spec.family = PolicyFamily::kGaussianLinear;
  spec.sigma = sigma;
  spec.weight_bound = 1e18;
  return spec;
}

PolicySpec lognormal_spec(double sigma) {
  PolicySpec spec;
  spec.family = PolicyFamily::kLognormal;
  spec.sigma = sigma;
  spec.weight_bound = 1e18;
  return spec;
}

PolicySpec softmax_spec(int bits, double epsilon) {
  PolicySpec spec;
  spec.family = PolicyFamily::kSoftmaxKronecker;
  spec.action_bits = bits;
  spec.epsilon = epsilon;
  spec.weight_bound = 1e18;
  return spec;
}

}  // namespace

TEST_CASE("gaussian log density at the mean is the standard normal value") {
  const auto spec = gaussian_spec(1.0);
  const ModelParams theta = ModelParams::scalar(0.0);
  const Vec x(0);
  const double lp = log_density(spec, theta, x, Action::continuous(0.0));
  CHECK(lp == doctest::Approx(std::log(1.0 / std::sqrt(2.0 * M_PI))).epsilon(1e-12));
}

TEST_CASE("zero-logit softmax puts mass 1/4 on each of the 4 actions") {
  const auto spec = softmax_spec(2, 0.0);
  ModelParams theta{Vec::Zero(2)};
  for (const Action& a : all_discrete_actions(2)) {
    CHECK(log_density(spec, theta, Vec(0), a) == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
  }
}

TEST_CASE("gaussian log density matches an independent pdf evaluation") {
  // N(2, 0.25) evaluated at 2.5
  const auto spec = gaussian_spec(0.5);
  const ModelParams theta = ModelParams::scalar(1.0);
  Vec x(1);
  x[0] = 2.0;
  const double expected = normal_pdf(2.5, 2.0, 0.5);
  const double lp = log_density(spec, theta, x, Action::continuous(2.5));
  CHECK(std::exp(lp) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lognormal density matches the change-of-variables formula") {
  const auto spec = lognormal_spec(0.7);
  const ModelParams theta = ModelParams::scalar(0.4);
  const double a = 1.8;
  const double expected = normal_pdf(std::log(a), 0.4, 0.7) / a;
  CHECK(std::exp(log_density(spec, theta, Vec(0), Action::continuous(a))) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sampling with tiny sigma concentrates at the mean") {
  const auto spec = gaussian_spec(1e-8);
  const ModelParams theta = ModelParams::scalar(0.7);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto sa = sample_action(spec, theta, Vec(0), rng);
    CHECK(std::abs(sa.action.value - 0.7) < 1e-6);
  }
}

TEST_CASE("epsilon = 1 mixes to the uniform distribution over 2^K actions") {
  // epsilon = 1 is outside the validated config range but exercises the
  // pure-uniform mixing branch of the sampler directly.
  PolicySpec uniform = softmax_spec(2, 1.0);
  Vec strong(2);
  strong << 3.0, -2.0;  // logits that would be far from uniform unmixed
  ModelParams theta{strong};
  Rng rng(7);
  const int draws = 40000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) {
    const auto sa = sample_action(uniform, theta, Vec(0), rng);
    counts[sa.action.bits[0] + 2 * sa.action.bits[1]] += 1;
  }
  const double tol = 4.0 / std::sqrt(static_cast<double>(draws));
  for (int c : counts) {
    const double freq = static_cast<double>(c) / draws;
    CHECK(std::abs(freq - 0.25) < tol);
  }
}

TEST_CASE("sample mean of a unit gaussian policy is the model mean") {
  const auto spec = gaussian_spec(1.0);
  const ModelParams theta = ModelParams::scalar(1.0);
  Vec x(1);
  x[0] = 1.0;
  Rng rng(42);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_action(spec, theta, x, rng).action.value;
  CHECK(std::abs(sum / n - 1.0) < 0.02);  // 6+ standard errors
}

TEST_CASE("propensity returned by sampling equals the density code path") {
  Rng rng(3);
  const auto gspec = gaussian_spec(0.8);
  const ModelParams gtheta = ModelParams::scalar(0.2);
  for (int i = 0; i < 20; ++i) {
    const auto sa = sample_action(gspec, gtheta, Vec(0), rng);
    CHECK(sa.propensity == std::exp(log_density(gspec, gtheta, Vec(0), sa.action)));
  }
  const auto dspec = softmax_spec(3, 0.1);
  ModelParams dtheta{Vec::Zero(3)};
  dtheta.theta << 0.5, -0.3, 1.0;
  for (int i = 0; i < 20; ++i) {
    const auto sa = sample_action(dspec, dtheta, Vec(0), rng);
    CHECK(sa.propensity == std::exp(log_density(dspec, dtheta, Vec(0), sa.action)));
  }
}

TEST_CASE("score vanishes at the gaussian mean and matches hand arithmetic") {
  const auto spec = gaussian_spec(1.0);
  Vec x(1);
  x[0] = 2.0;
  const ModelParams at_mean = ModelParams::scalar(0.5);
  const Vec zero = grad_log_density(spec, at_mean, x, Action::continuous(1.0));
  CHECK(zero[0] == doctest::Approx(0.0));  // a = theta^T x = 1

  const ModelParams theta = ModelParams::scalar(0.0);
  const Vec g = grad_log_density(spec, theta, x, Action::continuous(1.0));
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-12));  // (a - 0) * x / sigma^2
}

TEST_CASE("scores match central finite differences across all families") {
  Rng rng(11);
  int checked = 0;
  while (checked < 100) {
    const int family = static_cast<int>(rng.uniform_int(3));
    PolicySpec spec;
    ModelParams theta;
    Vec x;
    Action a;
    if (family == 0) {
      spec = gaussian_spec(0.3 + rng.uniform01());
      x = Vec(2);
      x << rng.normal(), rng.normal();
      theta = ModelParams{Vec(2)};
      theta.theta << rng.normal(), rng.normal();
      a = Action::continuous(rng.normal(theta.theta.dot(x), 2.0));
    } else if (family == 1) {
      spec = lognormal_spec(0.3 + rng.uniform01());
      x = Vec(0);
      theta = ModelParams::scalar(rng.normal());
      a = Action::continuous(std::exp(rng.normal(theta.theta[0], 1.0)));
    } else {
      spec = softmax_spec(3, rng.uniform01() < 0.5 ? 0.0 : 0.2);
      x = Vec(2);
      x << rng.normal(), rng.normal();
      theta = ModelParams{Vec(6)};
      for (int i = 0; i < 6; ++i) theta.theta[i] = rng.normal();
      std::vector<std::uint8_t> bits(3);
      for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
      a = Action::discrete(bits);
    }
    const Vec analytic = grad_log_density(spec, theta, x, a);
    const Vec numeric = central_differences(
        [&](const Vec& t) { return log_density(spec, ModelParams{t}, x, a); }, theta.theta);
    CHECK(max_rel_error(analytic, numeric) <= 1e-5);
    ++checked;
  }
}

TEST_CASE("identical parameters give importance weight exactly 1") {
  const auto spec = gaussian_spec(0.4);
  const ModelParams theta = ModelParams::scalar(1.3);
  CHECK(importance_weight(spec, theta, theta, Vec(0), Action::continuous(0.9)) == 1.0);
}

TEST_CASE("hand log-ratio: shift-1 gaussian weight at the midpoint is 1") {
  const auto spec = gaussian_spec(1.0);
  const double w = importance_weight(spec, ModelParams::scalar(1.0), ModelParams::scalar(0.0),
                                     Vec(0), Action::continuous(0.5));
  CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weight variance under a unit shift matches exp(1) - 1") {
  const auto spec = gaussian_spec(1.0);
  const ModelParams num = ModelParams::scalar(1.0);
  const ModelParams den = ModelParams::scalar(0.0);
  Rng rng(5);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto sa = sample_action(spec, den, Vec(0), rng);
    const double w = importance_weight(spec, num, den, Vec(0), sa.action);
    sum += w;
    sumsq += w * w;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  // Var of the empirical variance of w is dominated by the 4th moment
  // exp(6) - ...; allow 4 rough standard errors.
  const double expected = std::exp(1.0) - 1.0;
  const double stderr4 = 4.0 * std::sqrt((std::exp(6.0) - expected * expected) / n);
  CHECK(std::abs(var - expected) < stderr4);
}

TEST_CASE("importance weight errors out on denominator underflow") {
  const auto spec = gaussian_spec(0.01);
  // the action sits ~4000 sigma away from the denominator's mean
  CHECK_THROWS_AS(importance_weight(spec, ModelParams::scalar(40.0), ModelParams::scalar(0.0),
                                    Vec(0), Action::continuous(40.0)),
                  EstimatorError);
}

TEST_CASE("densities integrate to one") {
  const auto gspec = gaussian_spec(0.7);
  const ModelParams gtheta = ModelParams::scalar(0.4);
  const double gmass = simpson(
      [&](double a) {
        return std::exp(log_density(gspec, gtheta, Vec(0), Action::continuous(a)));
      },
      0.4 - 10 * 0.7, 0.4 + 10 * 0.7);
  CHECK(gmass == doctest::Approx(1.0).epsilon(1e-4));

  const auto lspec = lognormal_spec(0.5);
  const ModelParams ltheta = ModelParams::scalar(0.58);
  const double lmass = simpson(
      [&](double a) {
        return std::exp(log_density(lspec, ltheta, Vec(0), Action::continuous(a)));
      },
      1e-9, 60.0, 200000);
  CHECK(lmass == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("discrete masses sum to one exactly over all 2^K actions") {
  for (const double eps : {0.0, 0.15}) {
    const int k = 12;
    const auto spec = softmax_spec(k, eps);
    Rng rng(9);
    ModelParams theta{Vec(k)};
    for (int i = 0; i < k; ++i) theta.theta[i] = rng.normal();
    double mass = 0.0;
    for (const Action& a : all_discrete_actions(k))
      mass += std::exp(log_density(spec, theta, Vec(0), a));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("weight identity: expected importance weight is 1") {
  const auto spec = softmax_spec(4, 0.1);
  Rng rng(13);
  ModelParams behavior{Vec(4)}, target{Vec(4)};
  for (int i = 0; i < 4; ++i) {
    behavior.theta[i] = rng.normal();
    target.theta[i] = rng.normal();
  }
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto sa = sample_action(spec, behavior, Vec(0), rng);
    const double w = importance_weight(spec, target, behavior, Vec(0), sa.action);
    sum += w;
    sumsq += w * w;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("identical seeds give bitwise-identical sample streams") {
  const auto spec = gaussian_spec(0.9);
  const ModelParams theta = ModelParams::scalar(-0.3);
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    const auto sa = sample_action(spec, theta, Vec(0), a);
    const auto sb = sample_action(spec, theta, Vec(0), b);
    CHECK(sa.action.value == sb.action.value);
    CHECK(sa.propensity == sb.propensity);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const auto spec = gaussian_spec(1.0);
  Vec x(2);
  x << 1.0, 2.0;
  CHECK_THROWS_AS(log_density(spec, ModelParams::scalar(0.0), x, Action::continuous(0.0)),
                  DimensionError);
  CHECK_THROWS_AS(log_density(softmax_spec(2, 0.0), ModelParams::scalar(0.0), Vec(0),
                              Action::continuous(1.0)),
                  DimensionError);
}
