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

#include "atcc/policy/qlearn.hpp"

#include <cmath>

#include "atcc/error.hpp"

namespace atcc {

const std::array<ActionSet, kLatticeSize>& action_lattice() {
  static const std::array<ActionSet, kLatticeSize> lattice = [] {
    const ActionSet hr = Action::kLockHotRead, hw = Action::kLockHotWrite;
    const ActionSet fr = Action::kLockFullRead, fw = Action::kLockFullWrite;
    const ActionSet p = Action::kPrioritize;
    return std::array<ActionSet, kLatticeSize>{
        kRemainOcc, hw, hr | hw, hr | fw, fr | fw, hw | p, hr | hw | p, hr | fw | p, fr | fw | p,
    };
  }();
  return lattice;
}

double QTable::q(std::uint32_t state, std::size_t action) const {
  auto it = cells_.find(state);
  return it == cells_.end() ? 0.0 : it->second.at(action).q;
}

std::uint64_t QTable::visits(std::uint32_t state, std::size_t action) const {
  auto it = cells_.find(state);
  return it == cells_.end() ? 0 : it->second.at(action).n;
}

void QTable::update(std::uint32_t state, std::size_t action, double ret) {
  if (action >= num_actions_) throw InvariantViolation("action index out of range");
  auto it = cells_.find(state);
  if (it == cells_.end()) it = cells_.emplace(state, std::vector<Cell>(num_actions_)).first;
  Cell& c = it->second[action];
  ++c.n;
  c.q += (ret - c.q) / static_cast<double>(c.n);
}

std::size_t QTable::greedy(std::uint32_t state) const {
  auto it = cells_.find(state);
  if (it == cells_.end()) return 0;
  std::size_t best = 0;
  bool found = false;
  for (std::size_t a = 0; a < num_actions_; ++a) {
    const Cell& c = it->second[a];
    if (c.n == 0) continue;
    if (!found || c.q > it->second[best].q) {
      best = a;
      found = true;
    }
  }
  return best;
}

std::size_t QTable::choose(std::uint32_t state, double epsilon, Rng& rng) const {
  if (u01(rng) < epsilon) return static_cast<std::size_t>(uniform_int(rng, 0, num_actions_ - 1));
  return greedy(state);
}

QTable train_episodic(EpisodicEnv& env, const QLearnParams& params, TrainLog* log) {
  QTable q(env.num_actions());
  Rng rng(params.seed);
  const std::size_t tail_start = params.episodes - params.episodes / 10;
  double residual_sum = 0;
  std::size_t residual_n = 0;
  struct Visit {
    std::uint32_t state;
    std::size_t action;
    double reward;
  };
  std::vector<Visit> trace;
  for (std::size_t ep = 0; ep < params.episodes; ++ep) {
    trace.clear();
    std::uint32_t s = env.reset(rng);
    for (std::size_t t = 0; t < params.max_steps; ++t) {
      std::size_t a = q.choose(s, params.epsilon, rng);
      EpisodicEnv::Step st = env.step(s, a, rng);
      trace.push_back({s, a, st.reward});
      s = st.next;
      if (st.done) break;
    }
    double ret = 0;
    for (std::size_t i = trace.size(); i-- > 0;) {
      ret += trace[i].reward;
      if (ep >= tail_start) {
        residual_sum += std::abs(ret - q.q(trace[i].state, trace[i].action));
        ++residual_n;
      }
      q.update(trace[i].state, trace[i].action, ret);
    }
  }
  if (log != nullptr) {
    log->episodes = params.episodes;
    log->residual = residual_n == 0 ? 0.0 : residual_sum / static_cast<double>(residual_n);
  }
  return q;
}

PolicyTable greedy_table(const QTable& q, const BucketSpec& spec, const GreedyOptions& opts) {
  PolicyTable table(spec);
  const auto& lattice = action_lattice();
  for (const auto& [state, cells] : q.cells()) {
    std::size_t a = 0;
    if (cells[0].n == 0) {
      a = q.greedy(state);
    } else {
      double best = cells[0].q + opts.min_gain;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        if (cells[i].n >= opts.min_visits && cells[i].q > best) {
          best = cells[i].q;
          a = i;
        }
      }
    }
    if (a < lattice.size() && state < table.state_count()) table.set(state, lattice[a]);
  }
  return table;
}

}  // namespace atcc
