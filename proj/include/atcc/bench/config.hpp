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
#include <string>

#include "atcc/engine.hpp"
#include "atcc/policy/reward.hpp"
#include "atcc/priority.hpp"
#include "atcc/workload/workload.hpp"

namespace atcc {

enum class RuntimeKind : std::uint8_t { kReal, kSim };

struct TrainConfig {
  std::size_t episodes = 20;
  double episode_s = 10.0;
  double epsilon = 0.2;
  std::uint64_t seed = 7;
  // Export rule, see GreedyOptions.
  double min_gain = 0.05;
  std::uint64_t min_visits = 5;
};

struct BenchConfig {
  Protocol protocol = Protocol::kAtcc;
  WorkloadSpec workload;
  std::size_t threads = 8;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  RuntimeKind runtime = RuntimeKind::kReal;
  bool verify = false;
  bool pin_threads = true;
  std::string report_path;
  std::string csv_path;
  std::string history_path;
  double omega = kDefaultOmega;

  // Engine.
  PriorityParams priority;
  unsigned policy_every_k = 3;
  LockManagerOptions locks;
  double hot_fraction = 0.1;
  std::uint32_t hot_min_accesses = 2;
  std::string wal_path;

  // Policy.
  std::string policy_table;
  bool refine = false;
  BucketSpec buckets = BucketSpec::defaults();
  RewardCoeffs reward;

  TrainConfig train;

  // Throws ConfigError.
  void validate() const;
  EngineOptions engine_options(std::size_t max_workers) const;
};

// Flat sectioned key = value file:
//   [bench]     protocol threads duration_s seed runtime verify pin_threads
//               report csv history omega
//   [workload]  kind contention agentic_fraction rows ops theta read_ratio
//               warehouses delay_min_ms delay_max_ms backoff_min_ms
//               backoff_max_ms backoff_scale bg_backoff_min_ms
//               bg_backoff_max_ms explore_min_ms explore_max_ms
//               refine_min_ms refine_max_ms commit_min_ms commit_max_ms
//               routes prices aircraft seats intents
//   [priority]  alpha beta lambda rho delta_s delta_b_ms delta_i_ms
//   [reward]    b1 b2 a1_lat a2_tps a3_abort a_sql a_interval delta_s
//               delta_i_ms
//   [engine]    policy_every_k reevaluate_on_boost lock_timeout_ms
//               lock_slice_ms hot_fraction hot_min_accesses wal
//   [policy]    table refine bucket.<feature> = comma separated bounds
//   [train]     episodes episode_s epsilon seed min_gain min_visits
// Unknown sections or keys are errors. Throws ConfigError.
BenchConfig parse_config(const std::string& text);
// Also throws IoError when the file cannot be read.
BenchConfig load_config(const std::string& path);

}  // namespace atcc
