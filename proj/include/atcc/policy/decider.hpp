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

#include <memory>

#include "atcc/action.hpp"
#include "atcc/policy/features.hpp"
#include "atcc/policy/refiner.hpp"
#include "atcc/policy/reward.hpp"
#include "atcc/policy/table.hpp"
#include "atcc/txn_context.hpp"

namespace atcc {

// Source of policy decisions for the engine. decide() runs on the worker's
// critical path and must not block.
class Decider {
 public:
  virtual ~Decider() = default;
  virtual ActionSet decide(TxnContext& ctx, const StateKey& key) = 0;
  // Called once when an attempt ends; ctx.decisions is still populated.
  virtual void on_outcome(TxnContext& ctx, Outcome outcome, const GlobalMetrics& at_end) {
    (void)ctx;
    (void)outcome;
    (void)at_end;
  }
};

// Terminal reward credited to one decision of an attempt.
double decision_reward(const DecisionRecord& d, Outcome outcome, const GlobalMetrics& at_end,
                       const RewardCoeffs& coeffs);

// Lookup-table policy with optional asynchronous refinement.
class TableDecider final : public Decider {
 public:
  explicit TableDecider(std::shared_ptr<const PolicyTable> table, Refiner* refiner = nullptr,
                        RewardCoeffs coeffs = {});

  ActionSet decide(TxnContext& ctx, const StateKey& key) override;
  void on_outcome(TxnContext& ctx, Outcome outcome, const GlobalMetrics& at_end) override;

  const PolicyTable& table() const { return *table_; }

 private:
  std::shared_ptr<const PolicyTable> table_;
  Refiner* refiner_;
  RewardCoeffs coeffs_;
};

}  // namespace atcc
