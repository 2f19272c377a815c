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
#include <mutex>

#include "atcc/bench/config.hpp"
#include "atcc/bench/runner.hpp"
#include "atcc/policy/decider.hpp"
#include "atcc/policy/qlearn.hpp"

namespace atcc {

// Epsilon-greedy decider over the action lattice that credits the terminal
// reward of each attempt to every decision the attempt made.
class ExploringDecider final : public Decider {
 public:
  ExploringDecider(QTable& q, double epsilon, std::uint64_t seed, RewardCoeffs coeffs);

  ActionSet decide(TxnContext& ctx, const StateKey& key) override;
  void on_outcome(TxnContext& ctx, Outcome outcome, const GlobalMetrics& at_end) override;

  std::uint64_t updates() const { return updates_; }
  // Mean |return - Q| seen by the updates so far.
  double mean_residual() const { return updates_ == 0 ? 0.0 : residual_sum_ / static_cast<double>(updates_); }

 private:
  std::mutex mu_;
  QTable& q_;
  double epsilon_;
  Rng rng_;
  RewardCoeffs coeffs_;
  std::uint64_t updates_ = 0;
  double residual_sum_ = 0;
};

struct TrainResult {
  PolicyTable table;
  TrainLog log;
  std::uint64_t updates = 0;
  std::size_t states_seen = 0;
};

// Runs cfg.train.episodes simulated ATCC episodes of cfg.train.episode_s
// each against `runner`'s workload and returns the greedy table. The
// simulated runtime makes the result a function of the config alone.
TrainResult train_offline(const BenchConfig& cfg, BenchRunner& runner);

}  // namespace atcc
