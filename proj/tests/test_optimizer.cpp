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
#include <limits>

#include "oracles.hpp"
#include "scrm/optimizer.hpp"

using namespace scrm;

TEST_CASE("projection: interior points unchanged, exterior points normalized") {
  Vec inside(2);
  inside << 0.3, -0.4;
  CHECK((project_to_ball(inside, 1.0) - inside).norm() == 0.0);

  Vec outside(2);
  outside << 3.0, 4.0;
  const Vec projected = project_to_ball(outside, 1.0);
  CHECK(projected[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(projected[1] == doctest::Approx(0.8).epsilon(1e-12));
  // idempotence
  CHECK((project_to_ball(projected, 1.0) - projected).norm() <= 1e-15);
}

TEST_CASE("quadratic stub converges to its known minimizer") {
  Vec center(3);
  center << 1.0, -2.0, 0.5;
  const ObjectiveFn f = [&](const Vec& t) { return (t - center).squaredNorm(); };
  const GradientFn g = [&](const Vec& t) { return Vec(2.0 * (t - center)); };
  OptimizerConfig cfg;
  cfg.grad_tol = 1e-8;
  const auto result = minimize(f, g, Vec::Zero(3), cfg);
  CHECK((result.theta.theta - center).norm() < 1e-6);
  CHECK(result.objective < 1e-12);
}

TEST_CASE("constrained minimizer lands on the ball boundary") {
  Vec center(2);
  center << 3.0, 0.0;  // outside the radius-1 ball
  const ObjectiveFn f = [&](const Vec& t) { return (t - center).squaredNorm(); };
  const GradientFn g = [&](const Vec& t) { return Vec(2.0 * (t - center)); };
  OptimizerConfig cfg;
  cfg.radius = 1.0;
  cfg.grad_tol = 1e-10;
  const auto result = minimize(f, g, Vec::Zero(2), cfg);
  CHECK(result.theta.theta[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(result.theta.theta[1]) < 1e-8);
}

TEST_CASE("tiny gradient at the start returns immediately with zero steps") {
  const ObjectiveFn f = [](const Vec& t) { return t.squaredNorm(); };
  const GradientFn g = [](const Vec& t) { return Vec(2.0 * t); };
  OptimizerConfig cfg;
  cfg.grad_tol = 1e-3;
  Vec start = Vec::Constant(1, 1e-5);
  const auto result = minimize(f, g, start, cfg);
  CHECK(result.accepted_steps == 0);
  CHECK(result.theta.theta[0] == start[0]);
}

TEST_CASE("accepted objective values are nonincreasing and iterates stay feasible") {
  // a mildly nonconvex 2-d objective
  const ObjectiveFn f = [](const Vec& t) {
    return std::sin(3.0 * t[0]) * 0.2 + t.squaredNorm();
  };
  const GradientFn g = [](const Vec& t) {
    Vec out(2);
    out[0] = 0.6 * std::cos(3.0 * t[0]) + 2.0 * t[0];
    out[1] = 2.0 * t[1];
    return out;
  };
  OptimizerConfig cfg;
  cfg.radius = 2.0;
  Vec start(2);
  start << 1.9, -0.3;
  const auto result = minimize(f, g, start, cfg);
  REQUIRE(!result.trace.empty());
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i].objective <= result.trace[i - 1].objective + 1e-15);
  CHECK(result.theta.theta.norm() <= 2.0 + 1e-12);
  CHECK(result.objective <= result.initial_objective);
}

TEST_CASE("deterministic trace: identical inputs give identical traces") {
  const ObjectiveFn f = [](const Vec& t) { return std::pow(t[0] - 0.7, 4.0); };
  const GradientFn g = [](const Vec& t) {
    return Vec(Vec::Constant(1, 4.0 * std::pow(t[0] - 0.7, 3.0)));
  };
  OptimizerConfig cfg;
  const auto a = minimize(f, g, Vec::Zero(1), cfg);
  const auto b = minimize(f, g, Vec::Zero(1), cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].objective == b.trace[i].objective);
    CHECK(a.trace[i].step == b.trace[i].step);
  }
  CHECK(a.theta.theta[0] == b.theta.theta[0]);
}

TEST_CASE("non-finite objectives raise an error carrying the trace") {
  const ObjectiveFn f = [](const Vec& t) {
    return t[0] < 0.5 ? t[0] * t[0] : std::numeric_limits<double>::quiet_NaN();
  };
  const GradientFn g = [](const Vec&) { return Vec(Vec::Constant(1, -1.0)); };
  OptimizerConfig cfg;
  bool threw = false;
  try {
    (void)minimize(f, g, Vec::Zero(1), cfg);
  } catch (const OptimError&) {
    threw = true;
  }
  CHECK(threw);
}

TEST_CASE("svp minimization on a batch never worsens the warm start") {
  PolicySpec spec;
  spec.family = PolicyFamily::kGaussianLinear;
  spec.sigma = 0.5;
  spec.weight_bound = 1e18;
  const ModelParams behavior = ModelParams::scalar(0.0);
  Rng rng(3);
  Batch batch;
  batch.behavior_theta = behavior;
  for (int i = 0; i < 200; ++i) {
    Interaction it;
    it.context = Vec(0);
    const auto sa = sample_action(spec, behavior, it.context, rng);
    it.action = sa.action;
    it.propensity = sa.propensity;
    // losses favor actions near 1
    it.loss = std::max(-1.0, std::min(0.0, (sa.action.value - 1.0) * (sa.action.value - 1.0) - 1.0));
    batch.interactions.push_back(std::move(it));
  }
  ObjectiveConfig obj;
  obj.lambda = 0.5;
  obj.alpha = 1.0 / 200.0;
  OptimizerConfig opt;
  const auto result = minimize_objective(batch, spec, behavior, obj, opt);
  CHECK(result.objective <= result.initial_objective + 1e-12);
  CHECK(result.theta.theta[0] > 0.1);  // moved toward the low-loss region
}

TEST_CASE("random restarts keep the best objective and stay reproducible") {
  PolicySpec spec;
  spec.family = PolicyFamily::kGaussianLinear;
  spec.sigma = 1.0;
  spec.weight_bound = 1e18;
  const ModelParams behavior = ModelParams::scalar(0.0);
  Rng rng(4);
  Batch batch;
  batch.behavior_theta = behavior;
  for (int i = 0; i < 60; ++i) {
    Interaction it;
    it.context = Vec(0);
    const auto sa = sample_action(spec, behavior, it.context, rng);
    it.action = sa.action;
    it.propensity = sa.propensity;
    it.loss = -rng.uniform01();
    batch.interactions.push_back(std::move(it));
  }
  ObjectiveConfig obj;
  obj.lambda = 0.1;
  obj.alpha = 0.01;
  OptimizerConfig opt;
  opt.random_restarts = 5;
  Rng ra(9), rb(9);
  const auto a = minimize_objective(batch, spec, behavior, obj, opt, &ra);
  const auto b = minimize_objective(batch, spec, behavior, obj, opt, &rb);
  CHECK(a.objective == b.objective);
  CHECK(a.theta.theta[0] == b.theta.theta[0]);

  OptimizerConfig no_restarts = opt;
  no_restarts.random_restarts = 0;
  Rng rc(9);
  const auto base = minimize_objective(batch, spec, behavior, obj, no_restarts);
  CHECK(a.objective <= base.objective + 1e-15);
  CHECK_THROWS_AS(minimize_objective(batch, spec, behavior, obj, opt, nullptr), Error);
}
