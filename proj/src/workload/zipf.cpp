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

#include "atcc/workload/zipf.hpp"

#include <algorithm>
#include <cmath>

#include "atcc/error.hpp"

namespace atcc {

ZipfDistribution::ZipfDistribution(std::uint64_t n, double theta) : n_(n), theta_(theta) {
  if (n == 0) throw ConfigError("zipf: n must be at least 1");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ConfigError("zipf: theta must be a finite value >= 0");
  if (theta == 0.0) return;
  cdf_.resize(n);
  double sum = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    sum += std::pow(static_cast<double>(i + 1), -theta);
    cdf_[i] = sum;
  }
  for (double& c : cdf_) c /= sum;
  cdf_.back() = 1.0;
}

std::uint64_t ZipfDistribution::operator()(Rng& rng) const {
  if (cdf_.empty()) return uniform_int(rng, 0, n_ - 1);
  double u = u01(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(n_ - 1)));
}

double ZipfDistribution::pmf(std::uint64_t i) const {
  if (i >= n_) return 0.0;
  if (cdf_.empty()) return 1.0 / static_cast<double>(n_);
  return i == 0 ? cdf_[0] : cdf_[i] - cdf_[i - 1];
}

std::uint64_t zipf_sample(std::uint64_t n, double theta, Rng& rng) { return ZipfDistribution(n, theta)(rng); }

double generalized_harmonic(std::uint64_t k, double theta) {
  double sum = 0;
  for (std::uint64_t i = k; i >= 1; --i) sum += std::pow(static_cast<double>(i), -theta);  // small terms first
  return sum;
}

double zipf_top_mass(std::uint64_t n, double theta, std::uint64_t k) {
  if (n == 0) return 0.0;
  k = std::min(k, n);
  return generalized_harmonic(k, theta) / generalized_harmonic(n, theta);
}

}  // namespace atcc
