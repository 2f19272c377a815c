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
#include <optional>
#include <vector>

#include "atcc/bench/config.hpp"
#include "atcc/bench/report.hpp"
#include "atcc/engine.hpp"
#include "atcc/history.hpp"
#include "atcc/oracle/serialization.hpp"
#include "atcc/policy/decider.hpp"
#include "atcc/policy/refiner.hpp"
#include "atcc/row_store.hpp"
#include "atcc/workload/workload.hpp"

namespace atcc {

struct RunResult {
  MetricsReport report;
  EngineCounters counters;
  std::vector<HistoryEvent> history;    // only when verifying
  std::optional<OracleVerdict> verdict;  // only when verifying
};

// Lookup policy for an ATCC run: the configured table (or an empty one) and
// an optional refiner.
struct PolicySetup {
  std::shared_ptr<const PolicyTable> table;
  std::unique_ptr<Refiner> refiner;
  std::unique_ptr<TableDecider> decider;
};

PolicySetup make_policy(const BenchConfig& cfg);

// Owns the workload and the loaded row store so that several runs can share
// one load. Every run starts with cleared hot flags.
class BenchRunner {
 public:
  explicit BenchRunner(const BenchConfig& cfg);
  ~BenchRunner();

  const Workload& workload() const { return *workload_; }
  RowStore& store() { return *store_; }

  // `cfg` must describe the same workload tables as the constructor's. A
  // non-null `decider` replaces the configured policy of an ATCC run.
  RunResult run(const BenchConfig& cfg, Decider* decider = nullptr);
  RunResult run(Decider* decider = nullptr) { return run(base_, decider); }

 private:
  BenchConfig base_;
  std::unique_ptr<Workload> workload_;
  std::unique_ptr<RowStore> store_;
};

}  // namespace atcc
