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
#include "scrm/env.hpp"
#include "scrm/estimators.hpp"

using namespace scrm;
using namespace scrm::testing;

namespace {

PolicySpec unit_gaussian() {
  PolicySpec spec;
  spec.family = PolicyFamily::kGaussianLinear;
  spec.sigma = 1.0;
  spec.weight_bound = 1e18;
  return spec;
}

Interaction make_point(const PolicySpec& spec, const ModelParams& behavior, double action,
                       double loss) {
  Interaction it;
  it.context = Vec(0);
  it.action = Action::continuous(action);
  it.loss = loss;
  it.propensity = std::exp(log_density(spec, behavior, it.context, it.action));
  return it;
}

// Batch sampled under `behavior` with losses drawn uniformly in [-1, 0].
Batch random_batch(const PolicySpec& spec, const ModelParams& behavior, long n, Rng& rng) {
  Batch batch;
  batch.behavior_theta = behavior;
  for (long i = 0; i < n; ++i) {
    Interaction it;
    it.context = Vec(0);
    const auto sa = sample_action(spec, behavior, it.context, rng);
    it.action = sa.action;
    it.propensity = sa.propensity;
    it.loss = -rng.uniform01();
    batch.interactions.push_back(std::move(it));
  }
  return batch;
}

double test_side_weight(const PolicySpec& spec, const ModelParams& theta, const Interaction& it) {
  return std::exp(log_density(spec, theta, it.context, it.action)) / it.propensity;
}

}  // namespace

TEST_CASE("on-policy IPS is the plain average of losses") {
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(0.4);
  Rng rng(1);
  const Batch batch = random_batch(spec, theta, 100, rng);
  double avg = 0.0;
  for (const auto& it : batch.interactions) avg += it.loss;
  avg /= 100.0;
  CHECK(ips_estimate(batch, spec, theta) == doctest::Approx(avg).epsilon(1e-12));
}

TEST_CASE("single-sample IPS arithmetic: y=-1, w=2 gives -2") {
  const auto spec = unit_gaussian();
  const ModelParams target = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = target;
  Interaction it = make_point(spec, target, 0.0, -1.0);
  it.propensity /= 2.0;  // forces w = 2
  batch.interactions.push_back(it);
  CHECK(ips_estimate(batch, spec, target) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("clipping binds: w=10, y=-1, alpha=5 gives -5") {
  const auto spec = unit_gaussian();
  const ModelParams target = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = target;
  Interaction it = make_point(spec, target, 0.0, -1.0);
  it.propensity /= 10.0;
  batch.interactions.push_back(it);
  CHECK(clipped_ips_estimate(batch, spec, target, 5.0) == doctest::Approx(-5.0).epsilon(1e-12));
  // no clipping at alpha = inf reduces to IPS
  CHECK(clipped_ips_estimate(batch, spec, target, 1e300) ==
        doctest::Approx(ips_estimate(batch, spec, target)));
}

TEST_CASE("clipped estimate vanishes as alpha goes to 0") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.0);
  Rng rng(2);
  const Batch batch = random_batch(spec, behavior, 50, rng);
  CHECK(std::abs(clipped_ips_estimate(batch, spec, behavior, 1e-12)) < 1e-11);
}

TEST_CASE("SNIPS equals the average loss on-policy and is scale invariant") {
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(-0.2);
  Rng rng(3);
  Batch batch = random_batch(spec, theta, 80, rng);
  double avg = 0.0;
  for (const auto& it : batch.interactions) avg += it.loss;
  avg /= 80.0;
  CHECK(snips_estimate(batch, spec, theta) == doctest::Approx(avg).epsilon(1e-12));

  const ModelParams target = ModelParams::scalar(0.3);
  const double before = snips_estimate(batch, spec, target);
  for (auto& it : batch.interactions) it.propensity *= 7.5;
  CHECK(snips_estimate(batch, spec, target) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("SNIPS hand arithmetic: (y,w) = (-1,1),(0,3) gives -1/4") {
  const auto spec = unit_gaussian();
  const ModelParams target = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = target;
  batch.interactions.push_back(make_point(spec, target, 0.0, -1.0));  // w = 1
  Interaction heavy = make_point(spec, target, 0.0, 0.0);
  heavy.propensity /= 3.0;  // w = 3
  batch.interactions.push_back(heavy);
  CHECK(snips_estimate(batch, spec, target) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("IPS-IX reduces to IPS at alpha = 0") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.0);
  const ModelParams target = ModelParams::scalar(0.5);
  Rng rng(4);
  const Batch batch = random_batch(spec, behavior, 60, rng);
  CHECK(ips_ix_estimate(batch, spec, target, 0.0) ==
        doctest::Approx(ips_estimate(batch, spec, target)).epsilon(1e-12));
}

TEST_CASE("IPS-IX hand arithmetic: equal propensities, alpha = 1/2 give -2/3") {
  PolicySpec spec = unit_gaussian();
  spec.sigma = 1.0 / (0.5 * std::sqrt(2.0 * M_PI));  // density at the mean is exactly 0.5
  const ModelParams theta = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = theta;
  batch.interactions.push_back(make_point(spec, theta, 0.0, -1.0));
  CHECK(batch.interactions[0].propensity == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ips_ix_estimate(batch, spec, theta, 0.5) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("IPS-IX weights are capped pointwise by 1/alpha") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.0);
  const ModelParams target = ModelParams::scalar(3.0);  // big shift, huge raw weights
  Rng rng(5);
  const Batch batch = random_batch(spec, behavior, 200, rng);
  const double alpha = 0.05;
  for (const auto& it : batch.interactions) {
    const double log_t = log_density(spec, target, it.context, it.action);
    const double w = ix_weight(log_t, std::log(it.propensity), alpha);
    CHECK(w <= 1.0 / alpha + 1e-12);
  }
}

TEST_CASE("alpha-monotonicity: |IPS-IX| never grows with alpha") {
  const auto spec = unit_gaussian();
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const ModelParams behavior = ModelParams::scalar(rng.normal());
    const ModelParams target = ModelParams::scalar(behavior.theta[0] + rng.normal());
    const Batch batch = random_batch(spec, behavior, 50, rng);
    double prev = std::abs(ips_ix_estimate(batch, spec, target, 0.0));
    for (const double alpha : {0.01, 0.1, 0.5, 2.0}) {
      const double cur = std::abs(ips_ix_estimate(batch, spec, target, alpha));
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("pointwise sandwich: y * w_ix >= y * w for losses in [-1, 0]") {
  const auto spec = unit_gaussian();
  Rng rng(7);
  const ModelParams behavior = ModelParams::scalar(0.0);
  const ModelParams target = ModelParams::scalar(1.0);
  const Batch batch = random_batch(spec, behavior, 300, rng);
  CHECK(ips_ix_estimate(batch, spec, target, 0.1) >=
        ips_estimate(batch, spec, target) - 1e-12);
}

TEST_CASE("variance of identical clipped terms is zero") {
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = theta;
  for (int i = 0; i < 5; ++i) batch.interactions.push_back(make_point(spec, theta, 0.0, -0.5));
  CHECK(empirical_variance_ips(batch, spec, theta, 10.0) == 0.0);
}

TEST_CASE("two-sample clipped variance: chi = (-1, 0) gives 0.5") {
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = theta;
  batch.interactions.push_back(make_point(spec, theta, 0.0, -1.0));
  batch.interactions.push_back(make_point(spec, theta, 0.0, 0.0));
  CHECK(empirical_variance_ips(batch, spec, theta, 10.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("on-policy control variate zeroes the IPS-IX variance exactly") {
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(0.9);
  Rng rng(8);
  const Batch batch = random_batch(spec, theta, 64, rng);
  CHECK(empirical_variance_ips_ix(batch, spec, theta, 0.0) == 0.0);
  // contrast: the clipped-term variance on the same batch is Var(y) != 0
  std::vector<double> losses;
  for (const auto& it : batch.interactions) losses.push_back(it.loss);
  CHECK(empirical_variance_ips(batch, spec, theta, 10.0) ==
        doctest::Approx(two_pass_variance(losses)).epsilon(1e-12));
  CHECK(empirical_variance_ips(batch, spec, theta, 10.0) > 0.01);
}

TEST_CASE("two-sample control-variate variance: zeta = (0.5, -0.5) gives 0.5") {
  // w_ix = 0.5 with pi_theta = propensity and alpha = 1 at every point, so
  // zeta = (0.5 - 1) y = -y/2; losses -1 and +1... losses must stay in
  // [-1,0]; use y = (-1, 0) -> zeta = (0.5, 0) instead and check 0.125.
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = theta;
  batch.interactions.push_back(make_point(spec, theta, 0.0, -1.0));
  batch.interactions.push_back(make_point(spec, theta, 0.3, 0.0));
  // zeta_1 = (1/2 - 1)(-1) = 0.5, zeta_2 = 0; sample variance = 0.125
  CHECK(empirical_variance_ips_ix(batch, spec, theta, 1.0) ==
        doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("variance estimators equal the textbook two-pass oracle") {
  const auto spec = unit_gaussian();
  Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const ModelParams behavior = ModelParams::scalar(rng.normal());
    const ModelParams target = ModelParams::scalar(behavior.theta[0] + 0.5 * rng.normal());
    const long n = 20 + static_cast<long>(rng.uniform_int(100));
    const Batch batch = random_batch(spec, behavior, n, rng);
    const double alpha = 0.5 + 3.0 * rng.uniform01();

    std::vector<double> chi, zeta;
    for (const auto& it : batch.interactions) {
      const double w = test_side_weight(spec, target, it);
      chi.push_back(it.loss * std::min(w, alpha));
      const double w_ix = std::exp(log_density(spec, target, it.context, it.action)) /
                          (it.propensity +
                           alpha * std::exp(log_density(spec, target, it.context, it.action)));
      zeta.push_back((w_ix - 1.0) * it.loss);
    }
    CHECK(empirical_variance_ips(batch, spec, target, alpha) ==
          doctest::Approx(two_pass_variance(chi)).epsilon(1e-12));
    CHECK(empirical_variance_ips_ix(batch, spec, target, alpha) ==
          doctest::Approx(two_pass_variance(zeta)).epsilon(1e-12));
  }
}

TEST_CASE("variance estimators reject n < 2") {
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = theta;
  batch.interactions.push_back(make_point(spec, theta, 0.1, -0.5));
  CHECK_THROWS_AS(empirical_variance_ips(batch, spec, theta, 1.0), EstimatorError);
  CHECK_THROWS_AS(empirical_variance_ips_ix(batch, spec, theta, 1.0), EstimatorError);
}

TEST_CASE("single-batch naive MIS collapses to IPS") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.2);
  const ModelParams target = ModelParams::scalar(0.6);
  Rng rng(10);
  std::vector<Batch> batches;
  batches.push_back(random_batch(spec, behavior, 70, rng));
  CHECK(mis_estimate(batches, spec, target, MisWeights::kNaive) ==
        doctest::Approx(ips_estimate(batches[0], spec, target)).epsilon(1e-12));
}

TEST_CASE("MIS weights are a partition of unity at every sampled action") {
  const auto spec = unit_gaussian();
  Rng rng(11);
  std::vector<Batch> batches;
  batches.push_back(random_batch(spec, ModelParams::scalar(0.0), 40, rng));
  batches.push_back(random_batch(spec, ModelParams::scalar(0.7), 80, rng));
  batches.push_back(random_batch(spec, ModelParams::scalar(-0.4), 60, rng));
  for (const auto weights : {MisWeights::kNaive, MisWeights::kBalance}) {
    for (const Batch& b : batches) {
      for (const auto& it : b.interactions) {
        double total = 0.0;
        for (std::size_t t = 0; t < batches.size(); ++t)
          total += mis_weight(batches, spec, t, it.context, it.action, weights);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("naive MIS over two fixed behaviors is unbiased for the true risk") {
  EnvSpec env_spec;
  env_spec.kind = EnvKind::kGaussianQuadratic;
  env_spec.theta_star = 1.0;
  env_spec.loss_sigma = 0.1;
  const Environment env(env_spec);
  PolicySpec spec = unit_gaussian();
  spec.sigma = 0.2;
  const ModelParams behavior_a = ModelParams::scalar(0.8);
  const ModelParams behavior_b = ModelParams::scalar(1.2);
  const ModelParams target = ModelParams::scalar(1.0);
  const double truth = env.closed_form_risk(spec, target);

  const int reps = 200;
  const long n = 300;
  std::vector<double> naive_means, balance_means;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(1000 + rep);
    std::vector<Batch> batches;
    for (const ModelParams* b : {&behavior_a, &behavior_b}) {
      Batch batch;
      batch.behavior_theta = *b;
      for (long i = 0; i < n; ++i) {
        Interaction it;
        it.context = Vec(0);
        const auto sa = sample_action(spec, *b, it.context, rng);
        it.action = sa.action;
        it.propensity = sa.propensity;
        it.loss = env.sample_loss(it.context, it.action, rng);
        batch.interactions.push_back(std::move(it));
      }
      batches.push_back(std::move(batch));
    }
    naive_means.push_back(mis_estimate(batches, spec, target, MisWeights::kNaive));
    balance_means.push_back(mis_estimate(batches, spec, target, MisWeights::kBalance));
  }
  for (const auto* values : {&naive_means, &balance_means}) {
    double mean = 0.0;
    for (double v : *values) mean += v;
    mean /= reps;
    const double se = std::sqrt(two_pass_variance(*values) / reps);
    CHECK(std::abs(mean - truth) < 4.0 * se);
  }
}

TEST_CASE("cross-batch covariance of independent batches is near zero") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.0);
  const ModelParams target = ModelParams::scalar(0.4);
  const int reps = 300;
  std::vector<double> covs;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(500 + rep);
    const Batch p = random_batch(spec, behavior, 100, rng);
    const Batch q = random_batch(spec, behavior, 100, rng);
    covs.push_back(mis_cross_covariance(p, q, spec, target));
  }
  double mean = 0.0;
  for (double v : covs) mean += v;
  mean /= reps;
  const double se = std::sqrt(two_pass_variance(covs) / reps);
  CHECK(std::abs(mean) < 4.0 * se);
}

TEST_CASE("covariance of a batch with itself is its biased variance") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.1);
  const ModelParams target = ModelParams::scalar(0.5);
  Rng rng(12);
  const Batch batch = random_batch(spec, behavior, 90, rng);
  std::vector<double> r;
  for (const auto& it : batch.interactions)
    r.push_back(it.loss * test_side_weight(spec, target, it));
  CHECK(mis_cross_covariance(batch, batch, spec, target) ==
        doctest::Approx(population_variance(r)).epsilon(1e-12));
}

TEST_CASE("single-batch naive-MIS variance follows the printed scaling") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.0);
  const ModelParams target = ModelParams::scalar(0.3);
  Rng rng(13);
  std::vector<Batch> batches;
  batches.push_back(random_batch(spec, behavior, 50, rng));
  std::vector<double> r;
  for (const auto& it : batches[0].interactions)
    r.push_back(it.loss * test_side_weight(spec, target, it));
  const double n = 50.0;
  const double expected = (two_pass_variance(r) / n) / (n * n);
  CHECK(mis_variance_naive(batches, spec, target) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("naive-MIS variance rejects unequal batch sizes") {
  const auto spec = unit_gaussian();
  Rng rng(14);
  std::vector<Batch> batches;
  batches.push_back(random_batch(spec, ModelParams::scalar(0.0), 40, rng));
  batches.push_back(random_batch(spec, ModelParams::scalar(0.0), 41, rng));
  CHECK_THROWS_AS(mis_variance_naive(batches, spec, ModelParams::scalar(0.1)), EstimatorError);
}

TEST_CASE("order-statistic clip level is the 5th largest weight") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.0);
  const ModelParams target = ModelParams::scalar(1.5);
  Rng rng(15);
  const Batch batch = random_batch(spec, behavior, 120, rng);
  std::vector<double> weights;
  for (const auto& it : batch.interactions) weights.push_back(test_side_weight(spec, target, it));
  std::sort(weights.begin(), weights.end(), std::greater<>());
  CHECK(bottou_clip_alpha(batch, spec, target) == doctest::Approx(weights[4]).epsilon(1e-12));
}

TEST_CASE("batch spot check accepts consistent propensities and flags tampering") {
  const auto spec = unit_gaussian();
  const ModelParams behavior = ModelParams::scalar(0.0);
  Rng rng(16);
  Batch batch = random_batch(spec, behavior, 30, rng);
  CHECK_NOTHROW(spot_check_batch(batch, spec));
  batch.interactions[0].propensity *= 2.0;
  CHECK_THROWS_AS(spot_check_batch(batch, spec, 30), EstimatorError);
}

TEST_CASE("zero propensity is an error") {
  const auto spec = unit_gaussian();
  const ModelParams theta = ModelParams::scalar(0.0);
  Batch batch;
  batch.behavior_theta = theta;
  Interaction it = make_point(spec, theta, 0.0, -0.5);
  it.propensity = 0.0;
  batch.interactions.push_back(it);
  CHECK_THROWS_AS(ips_estimate(batch, spec, theta), EstimatorError);
}
