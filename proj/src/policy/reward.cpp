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

#include "atcc/policy/reward.hpp"

#include "atcc/error.hpp"

namespace atcc {

void RewardCoeffs::validate() const {
  if (!(delta_s > 0) || !(delta_i_ms > 0)) throw ConfigError("reward quanta must be strictly positive");
}

double compute_reward(Outcome outcome, const RewardDeltas& d, double sql_count, double interval_ms,
                      const RewardCoeffs& c) {
  double r = outcome == Outcome::kCommit ? c.b1 : -c.b2;
  r -= c.a1_lat * d.latency_ms;
  r += c.a2_tps * d.tps;
  r -= c.a3_abort * d.abort_rate;
  r += c.a_sql * sql_count / c.delta_s;
  r += c.a_interval * interval_ms / c.delta_i_ms;
  return r;
}

}  // namespace atcc
