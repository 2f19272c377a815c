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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "atcc/action.hpp"
#include "atcc/policy/table.hpp"
#include "atcc/rng.hpp"

namespace atcc {

// Action sets the trainer chooses among, ordered from least to most locking.
// Index 0 is RemainOCC. Prioritize is only offered together with a locking
// scope, since a priority only matters to lock conflicts.
inline constexpr std::size_t kLatticeSize = 9;
const std::array<ActionSet, kLatticeSize>& action_lattice();

// Monte-Carlo action values with running-mean updates.
class QTable {
 public:
  explicit QTable(std::size_t num_actions) : num_actions_(num_actions) {}

  std::size_t num_actions() const { return num_actions_; }
  double q(std::uint32_t state, std::size_t action) const;
  std::uint64_t visits(std::uint32_t state, std::size_t action) const;

  void update(std::uint32_t state, std::size_t action, double ret);

  // Best visited action; lowest index on ties; 0 for an unseen state.
  std::size_t greedy(std::uint32_t state) const;
  // Epsilon-greedy choice.
  std::size_t choose(std::uint32_t state, double epsilon, Rng& rng) const;

  std::size_t states_seen() const { return cells_.size(); }
  const auto& cells() const { return cells_; }

 private:
  struct Cell {
    double q = 0;
    std::uint64_t n = 0;
  };
  std::size_t num_actions_;
  std::map<std::uint32_t, std::vector<Cell>> cells_;  // ordered for reproducible export
};

// Finite-horizon episodic problem for the generic trainer.
class EpisodicEnv {
 public:
  struct Step {
    std::uint32_t next = 0;
    double reward = 0;
    bool done = false;
  };
  virtual ~EpisodicEnv() = default;
  virtual std::size_t num_actions() const = 0;
  virtual std::uint32_t reset(Rng& rng) = 0;
  virtual Step step(std::uint32_t state, std::size_t action, Rng& rng) = 0;
};

struct QLearnParams {
  std::size_t episodes = 1000;
  double epsilon = 0.1;
  std::uint64_t seed = 1;
  std::size_t max_steps = 1000;
};

struct TrainLog {
  std::size_t episodes = 0;
  // Mean |return - Q| of the updates in the last tenth of training.
  double residual = 0;
};

// Every-visit Monte-Carlo control with undiscounted returns.
QTable train_episodic(EpisodicEnv& env, const QLearnParams& params, TrainLog* log = nullptr);

// How greedy_table turns action values into table entries. A state leaves
// RemainOCC only for an action seen at least `min_visits` times whose value
// beats RemainOCC's by more than `min_gain`; states where RemainOCC was never
// tried fall back to the plain greedy choice.
struct GreedyOptions {
  double min_gain = 0.0;
  std::uint64_t min_visits = 1;
};

// Greedy policy over the action lattice as a lookup table.
PolicyTable greedy_table(const QTable& q, const BucketSpec& spec, const GreedyOptions& opts = {});

}  // namespace atcc
