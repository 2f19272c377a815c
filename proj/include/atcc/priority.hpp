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

#include <compare>
#include <cstdint>

#include "atcc/tid.hpp"

namespace atcc {

struct Priority {
  std::uint64_t score = 0;

  constexpr auto operator<=>(const Priority&) const = default;
};

// Weights and time quanta of the priority score. Quanta are in the unit of
// their signal: operations for sql, milliseconds for blocked and interval.
struct PriorityParams {
  double alpha = 1.0;   // per SQL operation
  double beta = 1.0;    // per blocked quantum
  double lambda = 2.0;  // per retry
  double rho = 1.0;     // per interval quantum
  double delta_s = 1.0;
  double delta_b_ms = 100.0;
  double delta_i_ms = 500.0;

  // Throws ConfigError on negative weights or non-positive quanta.
  void validate() const;
};

struct PriorityInputs {
  double sql_count = 0;
  double blocked_ms = 0;
  double retry_count = 0;
  double interval_ms = 0;
};

// floor(a*SQL/ds) + floor(b*Blocked/db) + floor(l*Retry) + floor(r*Interval/di)
Priority compute_priority(const PriorityInputs& stats, const PriorityParams& params);

// What the wound-wait comparison looks at.
struct TxnRank {
  Priority priority;
  TransactionId tid;
};

// Greater means higher rank: higher priority wins, then the older (smaller)
// tid. Throws InvariantViolation when both tids name the same transaction.
std::strong_ordering compare(const TxnRank& a, const TxnRank& b);

inline bool outranks(const TxnRank& a, const TxnRank& b) { return compare(a, b) > 0; }

}  // namespace atcc
