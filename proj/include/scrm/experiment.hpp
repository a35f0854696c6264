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

#ifndef SCRM_EXPERIMENT_HPP
#define SCRM_EXPERIMENT_HPP

#include <optional>
#include <string>

#include "scrm/config.hpp"
#include "scrm/csv.hpp"

namespace scrm {

struct CliOverrides {
  std::string out_dir = ".";
  std::optional<std::vector<std::uint64_t>> seeds;
  int threads = 0;  // 0: SCRM_LAB_THREADS env var, then hardware concurrency
};

// Exit codes: 0 success, 1 config error (field/line diagnostic on stderr),
// 2 runtime failure with whatever rows completed flushed to disk.

/// Sequential runs per (seed, method); writes results.csv, summary.csv and
/// the effective config echo.
int cmd_run(const std::string& config_path, const CliOverrides& overrides);

/// Estimator bias/variance study; writes estimators.csv.
int cmd_estimators(const std::string& config_path, const CliOverrides& overrides);

/// Lambda-grid or distance sweep; writes sweep_raw.csv, sweep_summary.csv
/// and sweep_best.csv.
int cmd_sweep(const std::string& config_path, const CliOverrides& overrides);

/// Worker-thread count resolution (flag, then env var, then hardware).
int resolve_threads(int requested);

}  // namespace scrm

#endif  // SCRM_EXPERIMENT_HPP
