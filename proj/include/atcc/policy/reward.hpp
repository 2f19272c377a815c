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

namespace atcc {

// Coefficients of the per-decision reward. The two quanta normalize the
// SQL-count and interval terms the same way the priority score does.
struct RewardCoeffs {
  double b1 = 1.0;          // commit bonus
  double b2 = 5.0;          // abort penalty
  double a1_lat = 0.01;     // per ms of latency increase
  double a2_tps = 0.001;    // per txn/s of throughput increase
  double a3_abort = 2.0;    // per unit of abort-rate increase
  double a_sql = 0.1;
  double a_interval = 0.1;
  double delta_s = 1.0;
  double delta_i_ms = 500.0;

  // Throws ConfigError on non-positive quanta.
  void validate() const;
};

// Change of the global metrics over the window straddling a decision.
struct RewardDeltas {
  double latency_ms = 0;
  double tps = 0;
  double abort_rate = 0;
};

enum class Outcome { kCommit, kAbort };

// r = b1[commit] - b2[abort] - a1*dLat + a2*dTPS - a3*dAbort
//     + a_sql*SQL/ds + a_interval*Interval/di
double compute_reward(Outcome outcome, const RewardDeltas& d, double sql_count, double interval_ms,
                      const RewardCoeffs& c);

}  // namespace atcc
