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

#include "atcc/policy/decider.hpp"

namespace atcc {

double decision_reward(const DecisionRecord& d, Outcome outcome, const GlobalMetrics& at_end,
                       const RewardCoeffs& coeffs) {
  RewardDeltas deltas;
  deltas.latency_ms = at_end.avg_latency_ms - d.metrics.avg_latency_ms;
  deltas.tps = at_end.tps - d.metrics.tps;
  deltas.abort_rate = at_end.abort_rate - d.metrics.abort_rate;
  return compute_reward(outcome, deltas, static_cast<double>(d.sql_count), d.interval_ms, coeffs);
}

TableDecider::TableDecider(std::shared_ptr<const PolicyTable> table, Refiner* refiner, RewardCoeffs coeffs)
    : table_(std::move(table)), refiner_(refiner), coeffs_(coeffs) {}

ActionSet TableDecider::decide(TxnContext& ctx, const StateKey& key) {
  ActionSet a = atcc::decide(*table_, key);
  if (refiner_ != nullptr) {
    if (auto corr = refiner_->take_correction(ctx.wid(), ctx.attempt())) a = *corr;
    refiner_->submit(RefineReport{ctx.wid(), ctx.attempt(), key.index, a, false, 0.0});
  }
  return a;
}

void TableDecider::on_outcome(TxnContext& ctx, Outcome outcome, const GlobalMetrics& at_end) {
  if (refiner_ == nullptr) return;
  for (const DecisionRecord& d : ctx.decisions) {
    refiner_->submit(
        RefineReport{ctx.wid(), ctx.attempt(), d.state.index, d.action, true, decision_reward(d, outcome, at_end, coeffs_)});
  }
}

}  // namespace atcc
