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

#include "scrm/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace scrm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  return parts;
}

// Typed accessors over the raw map. Consumed keys are tracked so that
// leftovers can be reported as unknown.
class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return raw_.values.count(key) > 0;
  }
  std::string get_string(const std::string& key, const std::string& fallback) {
    return has(key) ? raw_.values.at(key) : fallback;
  }
  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_double(key, raw_.values.at(key));
  }
  long get_long(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    return parse_long(key, raw_.values.at(key));
  }
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split(raw_.values.at(key), ','))
      if (!item.empty()) out.push_back(parse_double(key, item));
    return out;
  }
  std::vector<std::uint64_t> get_seeds(const std::string& key,
                                       std::vector<std::uint64_t> fallback) {
    if (!has(key)) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : split(raw_.values.at(key), ','))
      if (!item.empty()) out.push_back(static_cast<std::uint64_t>(parse_long(key, item)));
    return out;
  }

  int line_of(const std::string& key) const {
    const auto it = raw_.lines.find(key);
    return it == raw_.lines.end() ? -1 : it->second;
  }

  void fail(const std::string& key, const std::string& reason) const {
    throw ConfigError("config field '" + key + "': " + reason, line_of(key));
  }

  void check_no_unknown_keys() const {
    for (const auto& [key, value] : raw_.values)
      if (seen_.count(key) == 0)
        throw ConfigError("unknown config key '" + key + "'", line_of(key));
  }

 private:
  double parse_double(const std::string& key, const std::string& text) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + text + "'");
    }
    return 0;
  }
  long parse_long(const std::string& key, const std::string& text) const {
    try {
      std::size_t pos = 0;
      const long v = std::stol(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + text + "'");
    }
    return 0;
  }

  const RawConfig& raw_;
  std::set<std::string> seen_;
};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_number(values[i]);
  }
  return out;
}

}  // namespace

RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty config key", lineno);
    if (raw.values.count(key)) throw ConfigError("duplicate config key '" + key + "'", lineno);
    raw.values[key] = value;
    raw.lines[key] = lineno;
  }
  return raw;
}

RawConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ExperimentConfig build_experiment_config(const RawConfig& raw) {
  Reader r(raw);
  ExperimentConfig cfg;

  // env
  if (!r.has("env.kind")) throw ConfigError("missing required config field 'env.kind'");
  const std::string env_kind = r.get_string("env.kind", "");
  if (env_kind == "gaussian_quadratic")
    cfg.env.kind = EnvKind::kGaussianQuadratic;
  else if (env_kind == "pricing")
    cfg.env.kind = EnvKind::kPricing;
  else if (env_kind == "potential")
    cfg.env.kind = EnvKind::kPotential;
  else if (env_kind == "multilabel")
    cfg.env.kind = EnvKind::kSyntheticMultilabel;
  else
    r.fail("env.kind", "must be one of gaussian_quadratic|pricing|potential|multilabel");
  cfg.env.theta_star = r.get_double("env.theta_star", cfg.env.theta_star);
  cfg.env.loss_sigma = r.get_double("env.loss_sigma", cfg.env.loss_sigma);
  cfg.env.context_dim = static_cast<int>(r.get_long("env.context_dim", cfg.env.context_dim));
  cfg.env.active_dims = static_cast<int>(r.get_long("env.active_dims", cfg.env.active_dims));
  cfg.env.potential_mean_low =
      r.get_double("env.potential_mean_low", cfg.env.potential_mean_low);
  cfg.env.potential_mean_high =
      r.get_double("env.potential_mean_high", cfg.env.potential_mean_high);
  cfg.env.potential_sigma = r.get_double("env.potential_sigma", cfg.env.potential_sigma);
  cfg.env.label_bits = static_cast<int>(r.get_long("env.label_bits", cfg.env.label_bits));
  cfg.env.feature_dim = static_cast<int>(r.get_long("env.feature_dim", cfg.env.feature_dim));
  cfg.env.teacher_seed =
      static_cast<std::uint64_t>(r.get_long("env.teacher_seed", 0));
  validate_spec(cfg.env);

  // policy; the family defaults to what the environment expects
  std::string default_family = "gaussian_linear";
  if (cfg.env.kind == EnvKind::kPotential) default_family = "lognormal";
  if (cfg.env.kind == EnvKind::kSyntheticMultilabel) default_family = "softmax_kronecker";
  const std::string family = r.get_string("policy.family", default_family);
  if (family == "gaussian_linear")
    cfg.policy.family = PolicyFamily::kGaussianLinear;
  else if (family == "lognormal")
    cfg.policy.family = PolicyFamily::kLognormal;
  else if (family == "softmax_kronecker")
    cfg.policy.family = PolicyFamily::kSoftmaxKronecker;
  else
    r.fail("policy.family", "must be one of gaussian_linear|lognormal|softmax_kronecker");
  cfg.policy.sigma = r.get_double("policy.sigma", cfg.policy.sigma);
  cfg.policy.epsilon = r.get_double("policy.epsilon",
                                    cfg.policy.family == PolicyFamily::kSoftmaxKronecker ? 0.1
                                                                                         : 0.0);
  cfg.policy.action_bits = static_cast<int>(
      r.get_long("policy.action_bits",
                 cfg.env.kind == EnvKind::kSyntheticMultilabel ? cfg.env.label_bits : 0));
  cfg.policy.weight_bound = r.get_double("policy.weight_bound", cfg.policy.weight_bound);
  validate_spec(cfg.policy);
  if (cfg.env.kind == EnvKind::kSyntheticMultilabel) {
    if (cfg.policy.family != PolicyFamily::kSoftmaxKronecker)
      r.fail("policy.family", "multilabel environment needs the softmax_kronecker family");
    if (cfg.policy.action_bits != cfg.env.label_bits)
      r.fail("policy.action_bits", "must equal env.label_bits");
  } else if (cfg.policy.family == PolicyFamily::kSoftmaxKronecker) {
    r.fail("policy.family", "softmax_kronecker requires the multilabel environment");
  }

  // plan
  cfg.plan.n0 = r.get_long("plan.n0", cfg.plan.n0);
  cfg.plan.rollouts = static_cast<int>(r.get_long("plan.rollouts", cfg.plan.rollouts));
  cfg.plan.growth = static_cast<int>(r.get_long("plan.growth", cfg.plan.growth));
  const std::string lambda_rule = r.get_string("plan.lambda_rule", "theoretical");
  if (lambda_rule == "theoretical")
    cfg.plan.lambda_rule = LambdaRule::kTheoretical;
  else if (lambda_rule == "cv")
    cfg.plan.lambda_rule = LambdaRule::kCrossValidated;
  else if (lambda_rule.rfind("fixed:", 0) == 0) {
    cfg.plan.lambda_rule = LambdaRule::kFixed;
    try {
      cfg.plan.lambda_fixed = std::stod(lambda_rule.substr(6));
    } catch (const std::exception&) {
      r.fail("plan.lambda_rule", "fixed rule wants 'fixed:<value>'");
    }
  } else {
    r.fail("plan.lambda_rule", "must be theoretical|cv|fixed:<value>");
  }
  const std::string alpha_rule = r.get_string("plan.alpha_rule", "inverse_n");
  if (alpha_rule == "inverse_n")
    cfg.plan.alpha_rule = AlphaRule::kInverseN;
  else if (alpha_rule.rfind("fixed:", 0) == 0) {
    cfg.plan.alpha_rule = AlphaRule::kFixed;
    try {
      cfg.plan.alpha_fixed = std::stod(alpha_rule.substr(6));
    } catch (const std::exception&) {
      r.fail("plan.alpha_rule", "fixed rule wants 'fixed:<value>'");
    }
  } else {
    r.fail("plan.alpha_rule", "must be inverse_n|fixed:<value>");
  }
  cfg.plan.lambda_grid = r.get_doubles("plan.lambda_grid", cfg.plan.lambda_grid);
  cfg.plan.cv_folds = static_cast<int>(r.get_long("plan.cv_folds", cfg.plan.cv_folds));
  cfg.plan.pooled_fit = r.get_long("plan.pooled_fit", 0) != 0;
  cfg.plan.eval_samples = r.get_long("plan.eval_samples", cfg.plan.eval_samples);
  if (r.has("plan.skyline_risk"))
    cfg.plan.skyline_risk = r.get_double("plan.skyline_risk", 0.0);
  validate_plan(cfg.plan);

  // objective / optimizer
  cfg.objective.delta = r.get_double("objective.delta", cfg.objective.delta);
  cfg.optimizer.radius = r.get_double("optimizer.radius", cfg.optimizer.radius);
  cfg.optimizer.max_iters =
      static_cast<int>(r.get_long("optimizer.max_iters", cfg.optimizer.max_iters));
  cfg.optimizer.step_init = r.get_double("optimizer.step_init", cfg.optimizer.step_init);
  cfg.optimizer.armijo_c = r.get_double("optimizer.armijo_c", cfg.optimizer.armijo_c);
  cfg.optimizer.shrink = r.get_double("optimizer.shrink", cfg.optimizer.shrink);
  cfg.optimizer.grad_tol = r.get_double("optimizer.grad_tol", cfg.optimizer.grad_tol);
  cfg.optimizer.random_restarts =
      static_cast<int>(r.get_long("optimizer.random_restarts",
                                  cfg.policy.family == PolicyFamily::kSoftmaxKronecker ? 5 : 0));
  validate_config(cfg.optimizer);

  // initial model
  const Environment env_probe(cfg.env);
  const int dim = env_probe.param_dim(cfg.policy);
  cfg.objective.complexity_dim =
      static_cast<int>(r.get_long("objective.complexity_dim", dim));
  validate_config(ObjectiveConfig{0.0, 0.0, cfg.objective.delta, cfg.objective.complexity_dim});
  const std::vector<double> theta0 =
      r.get_doubles("init.theta", std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  if (static_cast<int>(theta0.size()) != dim)
    r.fail("init.theta", "expected " + std::to_string(dim) + " comma-separated values");
  cfg.theta0 = Vec(dim);
  for (int i = 0; i < dim; ++i) cfg.theta0[i] = theta0[static_cast<std::size_t>(i)];

  // methods / seeds
  const std::string methods = r.get_string("run.methods", "scrm,crm");
  cfg.methods.clear();
  for (const auto& item : split(methods, ',')) {
    if (item == "scrm")
      cfg.methods.push_back(Method::kScrm);
    else if (item == "crm")
      cfg.methods.push_back(Method::kCrm);
    else
      r.fail("run.methods", "must be a comma list over {scrm, crm}");
  }
  if (cfg.methods.empty()) r.fail("run.methods", "needs at least one method");
  cfg.seeds = r.get_seeds("seeds", cfg.seeds);
  if (cfg.seeds.empty()) r.fail("seeds", "needs at least one seed");
  cfg.master_seed = static_cast<std::uint64_t>(r.get_long("master_seed", 0));

  // estimator study
  cfg.study_shifts = r.get_doubles(
      "study.shifts", {0.0, 0.25 * M_PI, 0.5 * M_PI, 0.75 * M_PI, M_PI});
  const std::string study_estimators =
      r.get_string("study.estimators", "ips,clipped_ips,snips,ips_ix");
  cfg.study_estimators.clear();
  for (const auto& item : split(study_estimators, ',')) {
    if (item == "ips")
      cfg.study_estimators.push_back(EstimatorVariant::kIps);
    else if (item == "clipped_ips")
      cfg.study_estimators.push_back(EstimatorVariant::kClippedIps);
    else if (item == "snips")
      cfg.study_estimators.push_back(EstimatorVariant::kSnips);
    else if (item == "ips_ix")
      cfg.study_estimators.push_back(EstimatorVariant::kIpsIx);
    else
      r.fail("study.estimators", "unknown estimator '" + item + "'");
  }
  cfg.study_n = r.get_long("study.n", cfg.study_n);
  cfg.study_replications =
      static_cast<int>(r.get_long("study.replications", cfg.study_replications));

  // sweep
  const std::string sweep_kind = r.get_string("sweep.kind", "none");
  if (sweep_kind == "none")
    cfg.sweep_kind = SweepKind::kNone;
  else if (sweep_kind == "lambda")
    cfg.sweep_kind = SweepKind::kLambda;
  else if (sweep_kind == "distance")
    cfg.sweep_kind = SweepKind::kDistance;
  else
    r.fail("sweep.kind", "must be none|lambda|distance");
  cfg.sweep_lambdas = r.get_doubles("sweep.lambdas", cfg.plan.lambda_grid);
  cfg.sweep_delta0 = r.get_doubles("sweep.delta0", {0.0, 0.5, 1.0, 2.0, 3.0, 4.0});
  cfg.sweep_sigmas = r.get_doubles("sweep.sigmas", cfg.sweep_sigmas);

  r.check_no_unknown_keys();
  return cfg;
}

std::string render_effective_config(const ExperimentConfig& cfg) {
  std::string out;
  out += "# scrm-lab effective config (machine-written; re-running it reproduces results)\n";
  switch (cfg.env.kind) {
    case EnvKind::kGaussianQuadratic:
      out += "env.kind = gaussian_quadratic\n";
      break;
    case EnvKind::kPricing:
      out += "env.kind = pricing\n";
      break;
    case EnvKind::kPotential:
      out += "env.kind = potential\n";
      break;
    case EnvKind::kSyntheticMultilabel:
      out += "env.kind = multilabel\n";
      break;
  }
  out += "env.theta_star = " + format_number(cfg.env.theta_star) + "\n";
  out += "env.loss_sigma = " + format_number(cfg.env.loss_sigma) + "\n";
  out += "env.context_dim = " + std::to_string(cfg.env.context_dim) + "\n";
  out += "env.active_dims = " + std::to_string(cfg.env.active_dims) + "\n";
  out += "env.potential_mean_low = " + format_number(cfg.env.potential_mean_low) + "\n";
  out += "env.potential_mean_high = " + format_number(cfg.env.potential_mean_high) + "\n";
  out += "env.potential_sigma = " + format_number(cfg.env.potential_sigma) + "\n";
  out += "env.label_bits = " + std::to_string(cfg.env.label_bits) + "\n";
  out += "env.feature_dim = " + std::to_string(cfg.env.feature_dim) + "\n";
  out += "env.teacher_seed = " + std::to_string(cfg.env.teacher_seed) + "\n";

  switch (cfg.policy.family) {
    case PolicyFamily::kGaussianLinear:
      out += "policy.family = gaussian_linear\n";
      break;
    case PolicyFamily::kLognormal:
      out += "policy.family = lognormal\n";
      break;
    case PolicyFamily::kSoftmaxKronecker:
      out += "policy.family = softmax_kronecker\n";
      break;
  }
  out += "policy.sigma = " + format_number(cfg.policy.sigma) + "\n";
  out += "policy.epsilon = " + format_number(cfg.policy.epsilon) + "\n";
  out += "policy.action_bits = " + std::to_string(cfg.policy.action_bits) + "\n";
  out += "policy.weight_bound = " + format_number(cfg.policy.weight_bound) + "\n";

  out += "plan.n0 = " + std::to_string(cfg.plan.n0) + "\n";
  out += "plan.rollouts = " + std::to_string(cfg.plan.rollouts) + "\n";
  out += "plan.growth = " + std::to_string(cfg.plan.growth) + "\n";
  switch (cfg.plan.lambda_rule) {
    case LambdaRule::kTheoretical:
      out += "plan.lambda_rule = theoretical\n";
      break;
    case LambdaRule::kFixed:
      out += "plan.lambda_rule = fixed:" + format_number(cfg.plan.lambda_fixed) + "\n";
      break;
    case LambdaRule::kCrossValidated:
      out += "plan.lambda_rule = cv\n";
      break;
  }
  out += cfg.plan.alpha_rule == AlphaRule::kInverseN
             ? "plan.alpha_rule = inverse_n\n"
             : "plan.alpha_rule = fixed:" + format_number(cfg.plan.alpha_fixed) + "\n";
  out += "plan.lambda_grid = " + join_doubles(cfg.plan.lambda_grid) + "\n";
  out += "plan.cv_folds = " + std::to_string(cfg.plan.cv_folds) + "\n";
  out += "plan.pooled_fit = " + std::string(cfg.plan.pooled_fit ? "1" : "0") + "\n";
  out += "plan.eval_samples = " + std::to_string(cfg.plan.eval_samples) + "\n";
  if (cfg.plan.skyline_risk)
    out += "plan.skyline_risk = " + format_number(*cfg.plan.skyline_risk) + "\n";

  out += "objective.delta = " + format_number(cfg.objective.delta) + "\n";
  out += "objective.complexity_dim = " + std::to_string(cfg.objective.complexity_dim) + "\n";

  out += "optimizer.radius = " + format_number(cfg.optimizer.radius) + "\n";
  out += "optimizer.max_iters = " + std::to_string(cfg.optimizer.max_iters) + "\n";
  out += "optimizer.step_init = " + format_number(cfg.optimizer.step_init) + "\n";
  out += "optimizer.armijo_c = " + format_number(cfg.optimizer.armijo_c) + "\n";
  out += "optimizer.shrink = " + format_number(cfg.optimizer.shrink) + "\n";
  out += "optimizer.grad_tol = " + format_number(cfg.optimizer.grad_tol) + "\n";
  out += "optimizer.random_restarts = " + std::to_string(cfg.optimizer.random_restarts) + "\n";

  std::vector<double> theta0(static_cast<std::size_t>(cfg.theta0.size()));
  for (int i = 0; i < cfg.theta0.size(); ++i) theta0[static_cast<std::size_t>(i)] = cfg.theta0[i];
  out += "init.theta = " + join_doubles(theta0) + "\n";

  std::string methods;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    if (i) methods += ",";
    methods += method_name(cfg.methods[i]);
  }
  out += "run.methods = " + methods + "\n";

  std::string seeds;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) seeds += ",";
    seeds += std::to_string(cfg.seeds[i]);
  }
  out += "seeds = " + seeds + "\n";
  out += "master_seed = " + std::to_string(cfg.master_seed) + "\n";

  out += "study.shifts = " + join_doubles(cfg.study_shifts) + "\n";
  std::string estimators;
  for (std::size_t i = 0; i < cfg.study_estimators.size(); ++i) {
    if (i) estimators += ",";
    estimators += estimator_name(cfg.study_estimators[i]);
  }
  out += "study.estimators = " + estimators + "\n";
  out += "study.n = " + std::to_string(cfg.study_n) + "\n";
  out += "study.replications = " + std::to_string(cfg.study_replications) + "\n";

  switch (cfg.sweep_kind) {
    case SweepKind::kNone:
      out += "sweep.kind = none\n";
      break;
    case SweepKind::kLambda:
      out += "sweep.kind = lambda\n";
      break;
    case SweepKind::kDistance:
      out += "sweep.kind = distance\n";
      break;
  }
  out += "sweep.lambdas = " + join_doubles(cfg.sweep_lambdas) + "\n";
  out += "sweep.delta0 = " + join_doubles(cfg.sweep_delta0) + "\n";
  out += "sweep.sigmas = " + join_doubles(cfg.sweep_sigmas) + "\n";
  return out;
}

}  // namespace scrm
