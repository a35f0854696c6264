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

#include "scrm/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "scrm/common.hpp"

namespace scrm {

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 16) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double canonical_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return pairwise_sum(values);
}

double canonical_mean(std::vector<double> values) {
  if (values.empty()) throw EstimatorError("canonical_mean: empty input");
  const double n = static_cast<double>(values.size());
  return canonical_sum(std::move(values)) / n;
}

double canonical_sample_variance(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) throw EstimatorError("sample variance needs n >= 2");
  const double mean = canonical_mean(values);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - mean;
    sq[i] = d * d;
  }
  return canonical_sum(std::move(sq)) / static_cast<double>(n - 1);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw Error("fit_line: need >= 2 matched points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error("fit_line: degenerate abscissa");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double logaddexp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace scrm
