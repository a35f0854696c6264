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

#ifndef SCRM_COMMON_HPP
#define SCRM_COMMON_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace scrm {

using Vec = Eigen::VectorXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Shape or family mismatch between a parameter vector and its inputs.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

/// Invalid or degenerate estimator input (zero propensity, n < 2, ...).
class EstimatorError : public Error {
 public:
  explicit EstimatorError(const std::string& what) : Error(what) {}
};

/// Configuration file / experiment setup problem. Carries an optional
/// source line for CLI diagnostics.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Rate-limited diagnostic to stderr: the first few messages per key are
// printed, later ones only counted. Never alters results.
void warn_rate_limited(const std::string& key, const std::string& message);

}  // namespace scrm

#endif  // SCRM_COMMON_HPP
