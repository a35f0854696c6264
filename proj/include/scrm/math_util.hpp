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

#ifndef SCRM_MATH_UTIL_HPP
#define SCRM_MATH_UTIL_HPP

#include <span>
#include <vector>

namespace scrm {

/// Pairwise (cascade) summation in the given order.
double pairwise_sum(std::span<const double> values);

// Scalar reductions used by every estimator: terms are sorted by value
// before the pairwise reduction, which makes results exactly invariant to
// permuting the input (and incidentally more accurate than a naive sum).
double canonical_sum(std::vector<double> values);
double canonical_mean(std::vector<double> values);

/// Unbiased (n-1 denominator) two-pass sample variance with canonical
/// reduction order. Requires n >= 2.
double canonical_sample_variance(const std::vector<double>& values);

/// Least-squares line fit y = slope*x + intercept; r2 is the coefficient of
/// determination. Requires at least two points.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

double logaddexp(double a, double b);
double softplus(double t);
double sigmoid(double t);

}  // namespace scrm

#endif  // SCRM_MATH_UTIL_HPP
