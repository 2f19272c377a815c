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

#include "atcc/priority.hpp"

#include <cmath>

#include "atcc/error.hpp"

namespace atcc {

void PriorityParams::validate() const {
  if (alpha < 0 || beta < 0 || lambda < 0 || rho < 0) {
    throw ConfigError("priority weights must be non-negative");
  }
  if (!(delta_s > 0) || !(delta_b_ms > 0) || !(delta_i_ms > 0)) {
    throw ConfigError("priority time quanta must be strictly positive");
  }
}

namespace {

std::uint64_t floor_term(double v) {
  if (!(v > 0)) return 0;
  return static_cast<std::uint64_t>(std::floor(v));
}

}  // namespace

Priority compute_priority(const PriorityInputs& s, const PriorityParams& p) {
  return Priority{floor_term(p.alpha * s.sql_count / p.delta_s) +
                  floor_term(p.beta * s.blocked_ms / p.delta_b_ms) +
                  floor_term(p.lambda * s.retry_count) +
                  floor_term(p.rho * s.interval_ms / p.delta_i_ms)};
}

std::strong_ordering compare(const TxnRank& a, const TxnRank& b) {
  if (a.tid.same_txn(b.tid)) {
    throw InvariantViolation("rank comparison between identical tids " + a.tid.to_string());
  }
  if (auto c = a.priority <=> b.priority; c != 0) return c;
  // Older (smaller order key) ranks higher.
  return b.tid.order_key() <=> a.tid.order_key();
}

}  // namespace atcc
