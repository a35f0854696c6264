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

// Test-only oracles, kept independent of the library code paths they check.

#ifndef SCRM_TESTS_ORACLES_HPP
#define SCRM_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "scrm/policy.hpp"

namespace scrm::testing {

/// Plain two-pass sample variance with naive summation (n-1 denominator).
inline double two_pass_variance(const std::vector<double>& values) {
  const std::size_t n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(n - 1);
}

inline double population_variance(const std::vector<double>& values) {
  const std::size_t n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(n);
}

/// Central finite differences of a scalar function of theta.
inline Vec central_differences(const std::function<double(const Vec&)>& f, const Vec& theta,
                               double h = 1e-5) {
  Vec grad(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    Vec up = theta;
    Vec down = theta;
    up[i] += h;
    down[i] -= h;
    grad[i] = (f(up) - f(down)) / (2.0 * h);
  }
  return grad;
}

inline double max_rel_error(const Vec& approx, const Vec& exact) {
  const double scale = std::max(1e-6, exact.cwiseAbs().maxCoeff());
  return (approx - exact).cwiseAbs().maxCoeff() / scale;
}

/// Composite Simpson integration on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      int intervals = 4096) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310005024);
}

}  // namespace scrm::testing

#endif  // SCRM_TESTS_ORACLES_HPP
