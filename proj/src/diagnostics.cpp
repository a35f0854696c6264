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

#include "scrm/diagnostics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "scrm/math_util.hpp"

namespace scrm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double cosine_gaussian_integrand(double a, void* params) {
  const double mu = *static_cast<double*>(params);
  const double z = a - mu;
  return std::cos(a) * std::exp(-0.5 * z * z) / 2.5066282746310005024;  // sqrt(2*pi)
}

struct SkylineContext {
  const Environment* env;
  const PolicySpec* spec;
  long mc_samples;
  std::uint64_t seed;
  double radius;
};

// Common random numbers make this a deterministic function of theta, which
// is what the simplex search needs.
double skyline_risk_value(const gsl_vector* v, void* params) {
  const auto* ctx = static_cast<const SkylineContext*>(params);
  Vec theta(static_cast<int>(v->size));
  for (std::size_t i = 0; i < v->size; ++i)
    theta[static_cast<int>(i)] = gsl_vector_get(v, i);
  if (theta.norm() > ctx->radius) return 1.0 + theta.norm();  // push back into the ball
  Rng rng = make_stream(ctx->seed, 0, StreamPurpose::kOracle);
  return ctx->env->monte_carlo_risk(*ctx->spec, ModelParams(theta), ctx->mc_samples, rng).value;
}

}  // namespace

double gaussian_weight_variance(double theta, double theta_star, double sigma) {
  if (sigma <= 0.0) throw Error("gaussian_weight_variance: sigma must be > 0");
  const double d = (theta_star - theta) / sigma;
  return std::expm1(d * d);
}

std::vector<std::pair<double, double>> holder_ratio(const HolderProbe& probe) {
  if (!(probe.beta > 0.0 && probe.beta <= 1.0)) throw Error("holder_ratio: beta must be in (0,1]");
  std::vector<std::pair<double, double>> out;
  out.reserve(probe.theta_grid.size());
  for (const double theta : probe.theta_grid) {
    const double d2 = (theta - probe.theta_star) * (theta - probe.theta_star);
    if (d2 == 0.0) throw Error("holder_ratio: grid contains theta*, excess risk is 0");
    const double variance = gaussian_weight_variance(theta, probe.theta_star, probe.sigma);
    const double excess = d2;  // quadratic-loss closed form, sigma*-independent
    out.emplace_back(theta, variance / std::pow(excess, probe.beta));
  }
  return out;
}

double holder_gamma_hat(const HolderProbe& probe) {
  const auto ratios = holder_ratio(probe);
  double max_ratio = 0.0;
  for (const auto& [theta, r] : ratios) max_ratio = std::max(max_ratio, r);
  if (max_ratio <= 0.0) throw Error("holder_gamma_hat: degenerate grid");
  return 1.0 / max_ratio;
}

bool holder_check(const HolderProbe& probe) {
  if (probe.gamma <= 0.0) throw Error("holder_check: probe.gamma must be > 0");
  for (const auto& [theta, r] : holder_ratio(probe))
    if (probe.gamma * r > 1.0) return false;
  return true;
}

double quadrature_risk_cosine(double mu) {
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(512);
  gsl_function f;
  f.function = &cosine_gaussian_integrand;
  f.params = &mu;
  double result = 0.0, abserr = 0.0;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int status = gsl_integration_qag(&f, mu - 8.0, mu + 8.0, 1e-13, 1e-12, 512,
                                         GSL_INTEG_GAUSS61, ws, &result, &abserr);
  gsl_set_error_handler(old);
  gsl_integration_workspace_free(ws);
  if (status != 0) throw Error("quadrature failed: " + std::string(gsl_strerror(status)));
  return result;
}

std::vector<EstimatorStudyRow> estimator_study(const std::vector<double>& shifts,
                                               const std::vector<EstimatorVariant>& estimators,
                                               long n, int replications, std::uint64_t seed) {
  if (replications < 2) throw Error("estimator_study: needs >= 2 replications");
  if (n < 2) throw Error("estimator_study: needs n >= 2");
  PolicySpec spec;
  spec.family = PolicyFamily::kGaussianLinear;
  spec.sigma = 1.0;
  spec.weight_bound = 1e12;  // the study deliberately probes unbounded-weight territory
  const ModelParams logging = ModelParams::scalar(0.0);
  const Vec no_context(0);

  // estimates[shift][estimator] -> per-replication values
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> estimates;

  for (int rep = 0; rep < replications; ++rep) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(rep), StreamPurpose::kStudy);
    Batch batch;
    batch.behavior_theta = logging;
    batch.interactions.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      Interaction it;
      it.context = no_context;
      const SampledAction sa = sample_action(spec, logging, no_context, rng);
      it.action = sa.action;
      it.propensity = sa.propensity;
      it.loss = std::cos(sa.action.value);
      batch.interactions.push_back(std::move(it));
    }
    for (std::size_t s = 0; s < shifts.size(); ++s) {
      const ModelParams target = ModelParams::scalar(shifts[s]);
      for (std::size_t e = 0; e < estimators.size(); ++e) {
        EstimatorConfig cfg;
        cfg.variant = estimators[e];
        cfg.alpha = 0.0;  // per-estimator heuristics: order-statistic clip, 1/n smoothing
        estimates[{s, e}].push_back(estimate(cfg, batch, spec, target));
      }
    }
  }

  std::vector<EstimatorStudyRow> rows;
  rows.reserve(shifts.size() * estimators.size());
  for (std::size_t s = 0; s < shifts.size(); ++s) {
    const double truth = quadrature_risk_cosine(shifts[s]);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      const std::vector<double>& values = estimates[{s, e}];
      EstimatorStudyRow row;
      row.shift = shifts[s];
      row.estimator = estimators[e];
      row.n = n;
      row.replications = replications;
      row.truth = truth;
      row.bias = canonical_mean(values) - truth;
      row.variance = canonical_sample_variance(values);
      rows.push_back(row);
    }
  }
  return rows;
}

RateFit rate_slope(const std::vector<std::pair<long, double>>& curve) {
  std::vector<double> log_n, log_excess;
  int dropped = 0;
  for (const auto& [n, excess] : curve) {
    if (!(excess > 0.0) || !std::isfinite(excess)) {
      ++dropped;
      continue;
    }
    log_n.push_back(std::log(static_cast<double>(n)));
    log_excess.push_back(std::log(excess));
  }
  if (dropped > 0)
    warn_rate_limited("rate_slope",
                      "dropped " + std::to_string(dropped) + " nonpositive excess values");
  if (log_n.size() < 3) throw Error("rate_slope: needs >= 3 rollouts with positive excess");
  const LineFit fit = fit_line(log_n, log_excess);
  RateFit out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.r2 = fit.r2;
  out.points_used = static_cast<int>(log_n.size());
  out.points_dropped = dropped;
  return out;
}

RateFit rate_slope(const std::vector<RunResult>& results) {
  std::vector<std::pair<long, double>> pooled;
  for (const RunResult& r : results) {
    const auto curve = r.learning_curve();
    pooled.insert(pooled.end(), curve.begin(), curve.end());
  }
  return rate_slope(pooled);
}

RiskEstimate mc_risk_oracle(const Environment& env, const PolicySpec& spec,
                            const ModelParams& theta, long n, Rng& rng) {
  return env.monte_carlo_risk(spec, theta, n, rng);
}

ModelParams skyline_model(const Environment& env, const PolicySpec& spec,
                          const ModelParams& theta_init, long mc_samples, std::uint64_t seed,
                          double radius) {
  validate_params(theta_init);
  SkylineContext ctx{&env, &spec, mc_samples, seed, radius};
  const std::size_t dim = static_cast<std::size_t>(theta_init.dim());

  gsl_multimin_function f;
  f.n = dim;
  f.f = &skyline_risk_value;
  f.params = &ctx;

  gsl_vector* x = gsl_vector_alloc(dim);
  gsl_vector* step = gsl_vector_alloc(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x, i, theta_init.theta[static_cast<int>(i)]);
    gsl_vector_set(step, i, 0.5);
  }
  gsl_multimin_fminimizer* minimizer =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  gsl_multimin_fminimizer_set(minimizer, &f, x, step);

  int status = GSL_CONTINUE;
  for (int iter = 0; iter < 500 && status == GSL_CONTINUE; ++iter) {
    if (gsl_multimin_fminimizer_iterate(minimizer) != 0) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(minimizer), 1e-4);
  }
  Vec theta(static_cast<int>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    theta[static_cast<int>(i)] = gsl_vector_get(minimizer->x, i);
  gsl_multimin_fminimizer_free(minimizer);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return project_to_ball(ModelParams(theta), radius);
}

std::vector<DistanceSweepCell> distance_sweep(const DistanceSweepSettings& settings) {
  if (settings.env.kind != EnvKind::kGaussianQuadratic)
    throw Error("distance_sweep: GaussianQuadratic template expected");
  if (settings.delta0_grid.empty() || settings.sigma_grid.empty() || settings.seeds.empty())
    throw Error("distance_sweep: empty grid");

  std::vector<DistanceSweepCell> cells;
  const Environment env(settings.env);
  for (const double delta0 : settings.delta0_grid) {
    const ModelParams theta0 = ModelParams::scalar(settings.env.theta_star - delta0);
    for (const Method method : {Method::kScrm, Method::kCrm}) {
      double best_loss = kNaN;
      double best_sigma = kNaN;
      for (const double sigma : settings.sigma_grid) {
        PolicySpec spec = settings.policy;
        spec.sigma = sigma;
        std::vector<double> finals;
        finals.reserve(settings.seeds.size());
        for (const std::uint64_t seed : settings.seeds) {
          const std::uint64_t run_seed = substream(settings.master_seed, seed);
          const RunResult result =
              method == Method::kScrm
                  ? run_scrm(env, spec, theta0, settings.plan, settings.objective,
                             settings.optimizer, run_seed)
                  : run_crm(env, spec, theta0, settings.plan, settings.objective,
                            settings.optimizer, run_seed);
          finals.push_back(result.final_risk);
        }
        const double med = median(std::move(finals));
        if (std::isnan(best_loss) || med < best_loss) {
          best_loss = med;
          best_sigma = sigma;
        }
      }
      cells.push_back(DistanceSweepCell{delta0, method, best_sigma, best_loss});
    }
  }
  return cells;
}

}  // namespace scrm
