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

#include "atcc/bench/train.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

namespace atcc {

ExploringDecider::ExploringDecider(QTable& q, double epsilon, std::uint64_t seed, RewardCoeffs coeffs)
    : q_(q), epsilon_(epsilon), rng_(seed), coeffs_(coeffs) {}

ActionSet ExploringDecider::decide(TxnContext& ctx, const StateKey& key) {
  (void)ctx;
  std::lock_guard lk(mu_);
  return action_lattice()[q_.choose(key.index, epsilon_, rng_)];
}

void ExploringDecider::on_outcome(TxnContext& ctx, Outcome outcome, const GlobalMetrics& at_end) {
  const auto& lattice = action_lattice();
  std::lock_guard lk(mu_);
  for (const DecisionRecord& d : ctx.decisions) {
    auto it = std::find(lattice.begin(), lattice.end(), d.action);
    if (it == lattice.end()) continue;
    const auto a = static_cast<std::size_t>(it - lattice.begin());
    const double r = decision_reward(d, outcome, at_end, coeffs_);
    residual_sum_ += std::abs(r - q_.q(d.state.index, a));
    ++updates_;
    q_.update(d.state.index, a, r);
  }
}

TrainResult train_offline(const BenchConfig& cfg, BenchRunner& runner) {
  QTable q(kLatticeSize);
  TrainResult out{PolicyTable(cfg.buckets), {}, 0, 0};
  std::uint64_t updates_before_tail = 0;
  double residual_before_tail = 0;
  const std::size_t tail_start = cfg.train.episodes - cfg.train.episodes / 10;
  ExploringDecider decider(q, cfg.train.epsilon, derive_seed(cfg.train.seed, 0xDEC1DE), cfg.reward);
  for (std::size_t ep = 0; ep < cfg.train.episodes; ++ep) {
    if (ep == tail_start) {
      updates_before_tail = decider.updates();
      residual_before_tail = decider.mean_residual() * static_cast<double>(decider.updates());
    }
    BenchConfig e = cfg;
    e.protocol = Protocol::kAtcc;
    e.runtime = RuntimeKind::kSim;
    e.duration_s = cfg.train.episode_s;
    e.seed = derive_seed(cfg.train.seed, ep);
    e.verify = false;
    e.refine = false;
    RunResult r = runner.run(e, &decider);
    spdlog::info("train episode {}/{}: agentic commits {} abort rate {:.3f}, states {}", ep + 1, cfg.train.episodes,
                 r.report.agentic.commits, r.report.agentic.abort_rate, q.states_seen());
  }
  out.updates = decider.updates();
  out.states_seen = q.states_seen();
  out.log.episodes = cfg.train.episodes;
  const std::uint64_t tail_n = decider.updates() - updates_before_tail;
  const double tail_sum = decider.mean_residual() * static_cast<double>(decider.updates()) - residual_before_tail;
  out.log.residual = tail_n == 0 ? 0.0 : tail_sum / static_cast<double>(tail_n);
  out.table = greedy_table(q, cfg.buckets, GreedyOptions{cfg.train.min_gain, cfg.train.min_visits});
  spdlog::info("training done: {} updates over {} states, tail residual {:.4f}, {} non-default entries", out.updates,
               out.states_seen, out.log.residual, out.table.non_default());
  return out;
}

}  // namespace atcc
