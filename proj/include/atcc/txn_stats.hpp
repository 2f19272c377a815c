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

#include <cstddef>
#include <cstdint>
#include <unordered_set>

#include "atcc/row_store.hpp"
#include "atcc/runtime.hpp"

namespace atcc {

// Per-attempt counters used by the priority score, the policy features and
// the reward. All times are in milliseconds of runtime time.
struct TxnStats {
  std::uint64_t sql_count = 0;
  double blocked_ms = 0;
  std::uint64_t retry_count = 0;
  Nanos last_op_end{0};
  double interval_ms_total = 0;
  double last_interval_ms = 0;
  std::uint64_t consecutive_writes = 0;
  std::uint64_t hot_accesses = 0;
  // Round bookkeeping for the per-decision deltas.
  std::size_t rs_at_round_start = 0;
  std::size_t ws_at_round_start = 0;
  std::unordered_set<Key> round_keys;
  std::unordered_set<Key> prev_round_keys;

  double hot_access_ratio() const {
    return sql_count == 0 ? 0.0 : static_cast<double>(hot_accesses) / static_cast<double>(sql_count);
  }
};

}  // namespace atcc
