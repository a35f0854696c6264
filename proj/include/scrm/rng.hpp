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

#ifndef SCRM_RNG_HPP
#define SCRM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace scrm {

// All randomness in a run derives from one 64-bit master seed. Substreams
// are keyed by (seed index, rollout, purpose) through splitmix64 mixing, so
// any batch can be regenerated in isolation and paired runs (same seed,
// different method) share context/loss noise streams per rollout.
enum class StreamPurpose : std::uint64_t {
  kContext = 1,
  kAction = 2,
  kLoss = 3,
  kEval = 4,
  kCvShuffle = 5,
  kRestart = 6,
  kTeacher = 7,
  kStudy = 8,
  kOracle = 9,
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a substream seed from a key and up to two indices.
inline std::uint64_t substream(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = splitmix64(key);
  z = splitmix64(z ^ splitmix64(a));
  z = splitmix64(z ^ splitmix64(b));
  return z;
}

/// Random stream with explicit, implementation-pinned conversions.
///
/// The engine is std::mt19937_64 (bit-exact across platforms); the double
/// conversions below avoid std::*_distribution, whose algorithms are
/// implementation-defined. normal() always consumes exactly two uniforms so
/// stream positions stay aligned between paired runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (no spare caching).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n), rejection-sampled (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

inline Rng make_stream(std::uint64_t run_seed, std::uint64_t rollout, StreamPurpose purpose) {
  return Rng(substream(run_seed, rollout, static_cast<std::uint64_t>(purpose)));
}

}  // namespace scrm

#endif  // SCRM_RNG_HPP
