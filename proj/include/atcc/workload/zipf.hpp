// Copyright 2026 The ATCC Authors
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

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "atcc/rng.hpp"

namespace atcc {

// Zipf(theta) over [0, n): P(i) proportional to 1 / (i + 1)^theta. Sampling
// inverts an exact cumulative table, so theta = 0 is exactly uniform.
// Immutable after construction and safe to share between threads.
class ZipfDistribution {
 public:
  // Throws ConfigError when n == 0 or theta < 0.
  ZipfDistribution(std::uint64_t n, double theta);

  std::uint64_t n() const { return n_; }
  double theta() const { return theta_; }
  std::uint64_t operator()(Rng& rng) const;

  // Probability of index i.
  double pmf(std::uint64_t i) const;

 private:
  std::uint64_t n_;
  double theta_;
  std::vector<double> cdf_;  // empty for theta == 0
};

// Free-function form for one-off draws; builds the table each call.
std::uint64_t zipf_sample(std::uint64_t n, double theta, Rng& rng);

// Generalized harmonic number sum_{i=1..k} i^-theta.
double generalized_harmonic(std::uint64_t k, double theta);

// Mass of the k most popular indices: H(k, theta) / H(n, theta).
double zipf_top_mass(std::uint64_t n, double theta, std::uint64_t k);

}  // namespace atcc
