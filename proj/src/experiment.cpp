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

#include "scrm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include "scrm/math_util.hpp"

namespace scrm {

namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs jobs 0..count-1 across workers; results land in slot order, so output
// assembly is deterministic regardless of the thread count.
void run_jobs(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  if (count == 0) return;
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          job(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ExperimentConfig load_config(const std::string& path, const CliOverrides& overrides) {
  ExperimentConfig cfg = build_experiment_config(parse_config_file(path));
  if (overrides.seeds) {
    if (overrides.seeds->empty()) throw ConfigError("--seeds: needs at least one seed");
    cfg.seeds = *overrides.seeds;
  }
  return cfg;
}

void write_effective_config(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::ofstream out(fs::path(out_dir) / "effective_config.cfg", std::ios::binary);
  if (!out) throw Error("cannot write effective config into '" + out_dir + "'");
  out << render_effective_config(cfg);
}

RunResult execute_run(const ExperimentConfig& cfg, const Environment& env, Method method,
                      std::uint64_t seed) {
  const std::uint64_t run_seed = substream(cfg.master_seed, seed);
  const ModelParams theta0{cfg.theta0};
  return method == Method::kScrm
             ? run_scrm(env, cfg.policy, theta0, cfg.plan, cfg.objective, cfg.optimizer, run_seed)
             : run_crm(env, cfg.policy, theta0, cfg.plan, cfg.objective, cfg.optimizer, run_seed);
}

void append_rollout_rows(CsvTable& table, const std::string& run_id, const RunResult& result,
                         int growth) {
  double regret_partial = 0.0;
  bool regret_nan = false;
  for (const RolloutRecord& rec : result.rollouts) {
    if (std::isnan(rec.excess)) regret_nan = true;
    if (!regret_nan)
      regret_partial += rec.excess * static_cast<double>(rec.batch_size) * growth;
    table.add_row({run_id, std::to_string(result.seed), method_name(result.method),
                   std::to_string(rec.m), std::to_string(rec.batch_size),
                   std::to_string(rec.cum_samples), csv_number(rec.lambda),
                   csv_number(rec.test_risk), csv_number(rec.excess),
                   csv_number(regret_nan ? kNaN : regret_partial)});
  }
}

void append_summary_row(CsvTable& table, const std::string& run_id, const RunResult& result) {
  table.add_row({run_id, std::to_string(result.seed), method_name(result.method),
                 std::to_string(result.rollouts.size()), std::to_string(result.total_samples),
                 csv_number(result.final_risk), csv_number(result.final_excess),
                 csv_number(result.regret), csv_number(result.wall_seconds)});
}

void note_clamping(const Environment& env) {
  const double frac = env.clamp_fraction();
  if (frac > 0.0)
    std::fprintf(stderr, "[scrm-lab] note: %.4f%% of emitted losses were clamped into [-1, 0]\n",
                 100.0 * frac);
}

CsvTable make_results_table() {
  return CsvTable({"run_id", "seed", "method", "m", "n_m", "cum_n", "lambda", "test_loss",
                   "excess_risk", "regret_partial"});
}

CsvTable make_summary_table() {
  return CsvTable({"run_id", "seed", "method", "rollouts", "total_n", "final_loss",
                   "final_excess", "regret", "wall_seconds"});
}

int run_guarded(const std::string& config_path, const CliOverrides& overrides,
                const std::function<int(const ExperimentConfig&, const std::string&)>& body) {
  ExperimentConfig cfg;
  std::string out_dir;
  try {
    cfg = load_config(config_path, overrides);
    out_dir = overrides.out_dir;
    fs::create_directories(out_dir);
    write_effective_config(cfg, out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "[scrm-lab] config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[scrm-lab] error: %s\n", e.what());
    return 1;
  }
  try {
    return body(cfg, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[scrm-lab] runtime failure: %s\n", e.what());
    return 2;
  }
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SCRM_LAB_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_run(const std::string& config_path, const CliOverrides& overrides) {
  return run_guarded(config_path, overrides, [&](const ExperimentConfig& cfg,
                                                 const std::string& out_dir) {
    const Environment env(cfg.env);
    struct Job {
      Method method;
      std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const std::uint64_t seed : cfg.seeds)
      for (const Method method : cfg.methods) jobs.push_back({method, seed});

    std::vector<RunResult> results(jobs.size());
    std::vector<char> done(jobs.size(), 0);
    int exit_code = 0;
    try {
      run_jobs(jobs.size(), resolve_threads(overrides.threads), [&](std::size_t i) {
        results[i] = execute_run(cfg, env, jobs[i].method, jobs[i].seed);
        done[i] = 1;
      });
    } catch (const std::exception& e) {
      std::fprintf(stderr, "[scrm-lab] runtime failure: %s (flushing partial results)\n",
                   e.what());
      exit_code = 2;
    }

    CsvTable results_table = make_results_table();
    CsvTable summary_table = make_summary_table();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!done[i]) continue;
      const std::string run_id =
          method_name(jobs[i].method) + "-s" + std::to_string(jobs[i].seed);
      append_rollout_rows(results_table, run_id, results[i], cfg.plan.growth);
      append_summary_row(summary_table, run_id, results[i]);
    }
    results_table.save((fs::path(out_dir) / "results.csv").string());
    summary_table.save((fs::path(out_dir) / "summary.csv").string());
    note_clamping(env);
    return exit_code;
  });
}

int cmd_estimators(const std::string& config_path, const CliOverrides& overrides) {
  return run_guarded(config_path, overrides, [&](const ExperimentConfig& cfg,
                                                 const std::string& out_dir) {
    const auto rows = estimator_study(cfg.study_shifts, cfg.study_estimators, cfg.study_n,
                                      cfg.study_replications, cfg.master_seed);
    CsvTable table({"shift", "estimator", "n", "replications", "bias", "variance", "truth"});
    for (const EstimatorStudyRow& row : rows)
      table.add_row({csv_number(row.shift), estimator_name(row.estimator),
                     std::to_string(row.n), std::to_string(row.replications),
                     csv_number(row.bias), csv_number(row.variance), csv_number(row.truth)});
    table.save((fs::path(out_dir) / "estimators.csv").string());
    return 0;
  });
}

int cmd_sweep(const std::string& config_path, const CliOverrides& overrides) {
  return run_guarded(config_path, overrides, [&](const ExperimentConfig& cfg,
                                                 const std::string& out_dir) {
    if (cfg.sweep_kind == SweepKind::kNone) {
      std::fprintf(stderr, "[scrm-lab] config error: sweep.kind must be lambda or distance\n");
      return 1;
    }
    struct Cell {
      double value = 0.0;   // lambda or delta0
      double sigma = 0.0;   // distance sweeps only
      Method method;
      std::uint64_t seed = 0;
    };
    std::vector<Cell> cells;
    if (cfg.sweep_kind == SweepKind::kLambda) {
      if (cfg.sweep_lambdas.empty()) {
        std::fprintf(stderr, "[scrm-lab] config error: sweep.lambdas is empty\n");
        return 1;
      }
      for (const double lambda : cfg.sweep_lambdas)
        for (const std::uint64_t seed : cfg.seeds)
          for (const Method method : cfg.methods) cells.push_back({lambda, 0.0, method, seed});
    } else {
      if (cfg.sweep_delta0.empty() || cfg.sweep_sigmas.empty()) {
        std::fprintf(stderr, "[scrm-lab] config error: sweep.delta0 / sweep.sigmas is empty\n");
        return 1;
      }
      if (cfg.env.kind != EnvKind::kGaussianQuadratic) {
        std::fprintf(stderr,
                     "[scrm-lab] config error: distance sweeps need env.kind = "
                     "gaussian_quadratic\n");
        return 1;
      }
      for (const double delta0 : cfg.sweep_delta0)
        for (const double sigma : cfg.sweep_sigmas)
          for (const std::uint64_t seed : cfg.seeds)
            for (const Method method : cfg.methods)
              cells.push_back({delta0, sigma, method, seed});
    }

    const Environment env(cfg.env);
    std::vector<RunResult> results(cells.size());
    std::vector<char> done(cells.size(), 0);
    int exit_code = 0;
    try {
      run_jobs(cells.size(), resolve_threads(overrides.threads), [&](std::size_t i) {
        const Cell& cell = cells[i];
        ExperimentConfig local = cfg;
        if (cfg.sweep_kind == SweepKind::kLambda) {
          local.plan.lambda_rule = LambdaRule::kFixed;
          local.plan.lambda_fixed = cell.value;
          results[i] = execute_run(local, env, cell.method, cell.seed);
        } else {
          local.policy.sigma = cell.sigma;
          local.theta0 = Vec::Constant(1, cfg.env.theta_star - cell.value);
          results[i] = execute_run(local, env, cell.method, cell.seed);
        }
        done[i] = 1;
      });
    } catch (const std::exception& e) {
      std::fprintf(stderr, "[scrm-lab] runtime failure: %s (flushing partial results)\n",
                   e.what());
      exit_code = 2;
    }

    const bool is_lambda = cfg.sweep_kind == SweepKind::kLambda;
    const std::string kind_col = is_lambda ? "lambda" : "delta0";
    CsvTable raw = make_results_table();
    CsvTable summary({kind_col, "sigma", "seed", "method", "final_loss", "final_excess",
                      "regret"});
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!done[i]) continue;
      const Cell& cell = cells[i];
      const std::string run_id = method_name(cell.method) + "-" + (is_lambda ? "l" : "d") +
                                 csv_number(cell.value) +
                                 (is_lambda ? "" : "-g" + csv_number(cell.sigma)) + "-s" +
                                 std::to_string(cell.seed);
      append_rollout_rows(raw, run_id, results[i], cfg.plan.growth);
      summary.add_row({csv_number(cell.value), csv_number(is_lambda ? kNaN : cell.sigma),
                       std::to_string(cell.seed), method_name(cell.method),
                       csv_number(results[i].final_risk), csv_number(results[i].final_excess),
                       csv_number(results[i].regret)});
    }

    // best-per-cell selection: median final loss over seeds, ties keep the
    // smaller grid value (and smaller sigma for distance sweeps)
    CsvTable best = is_lambda
                        ? CsvTable({"method", "best_lambda", "median_final_loss"})
                        : CsvTable({"delta0", "method", "best_sigma", "median_final_loss"});
    const auto median_over_seeds = [&](Method method, double value, double sigma) {
      std::vector<double> finals;
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (done[i] && cells[i].method == method && cells[i].value == value &&
            (is_lambda || cells[i].sigma == sigma))
          finals.push_back(results[i].final_risk);
      return finals.empty() ? kNaN : median(std::move(finals));
    };
    for (const Method method : cfg.methods) {
      if (is_lambda) {
        std::vector<double> grid = cfg.sweep_lambdas;
        std::sort(grid.begin(), grid.end());
        double best_value = kNaN, best_loss = kNaN;
        for (const double lambda : grid) {
          const double med = median_over_seeds(method, lambda, 0.0);
          if (std::isnan(med)) continue;
          if (std::isnan(best_loss) || med < best_loss) {
            best_loss = med;
            best_value = lambda;
          }
        }
        best.add_row({method_name(method), csv_number(best_value), csv_number(best_loss)});
      } else {
        for (const double delta0 : cfg.sweep_delta0) {
          std::vector<double> grid = cfg.sweep_sigmas;
          std::sort(grid.begin(), grid.end());
          double best_sigma = kNaN, best_loss = kNaN;
          for (const double sigma : grid) {
            const double med = median_over_seeds(method, delta0, sigma);
            if (std::isnan(med)) continue;
            if (std::isnan(best_loss) || med < best_loss) {
              best_loss = med;
              best_sigma = sigma;
            }
          }
          best.add_row({csv_number(delta0), method_name(method), csv_number(best_sigma),
                        csv_number(best_loss)});
        }
      }
    }

    raw.save((fs::path(out_dir) / "sweep_raw.csv").string());
    summary.save((fs::path(out_dir) / "sweep_summary.csv").string());
    best.save((fs::path(out_dir) / "sweep_best.csv").string());
    note_clamping(env);
    return exit_code;
  });
}

}  // namespace scrm
