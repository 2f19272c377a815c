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

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>
#include <vector>

#include "atcc/action.hpp"
#include "atcc/policy/mpmc_queue.hpp"
#include "atcc/policy/table.hpp"
#include "atcc/tid.hpp"

namespace atcc {

struct RefineReport {
  WorkerId wid = 0;
  std::uint64_t attempt = 0;
  std::uint32_t state = 0;
  ActionSet action;
  bool has_reward = false;
  double reward = 0;
};

struct RefinerOptions {
  std::size_t queue_capacity = 4096;
  std::size_t max_workers = 256;
  // Smoothing factor of the per (state, action) reward average.
  double ema = 0.1;
  // Samples an action needs before it can displace the base choice.
  std::uint32_t min_samples = 8;
  // Reward updates between shadow-table publications.
  std::uint32_t publish_every = 256;
};

// Background refinement of the lookup policy. Workers hand over reports
// without blocking; a single consumer thread keeps a shadow copy of the table
// whose entries follow the best recent average reward per state, and answers
// decision reports with a correction when the shadow disagrees. Corrections
// are tagged with the attempt they were computed for and are discarded if
// that attempt is over by the time the worker looks.
class Refiner {
 public:
  Refiner(std::shared_ptr<const PolicyTable> base, RefinerOptions opts = {});
  ~Refiner();

  Refiner(const Refiner&) = delete;
  Refiner& operator=(const Refiner&) = delete;

  void start();
  void stop();

  // Never blocks; a full queue drops the report.
  bool submit(const RefineReport& r);

  // Consumes the pending correction for `wid`, if it belongs to `attempt`.
  std::optional<ActionSet> take_correction(WorkerId wid, std::uint64_t attempt);

  // Processes every queued report on the calling thread. For tests and for
  // running without a consumer thread.
  void drain();

  std::shared_ptr<const PolicyTable> shadow() const;
  std::uint64_t shadow_version() const { return shadow_version_.load(std::memory_order_acquire); }
  std::uint64_t dropped() const { return dropped_.load(std::memory_order_relaxed); }
  std::uint64_t processed() const { return processed_.load(std::memory_order_relaxed); }
  std::uint64_t corrections_posted() const { return posted_.load(std::memory_order_relaxed); }
  std::uint64_t stale_discarded() const { return stale_.load(std::memory_order_relaxed); }

 private:
  struct Avg {
    double value = 0;
    std::uint32_t n = 0;
  };

  void process(const RefineReport& r);
  void publish();

  std::shared_ptr<const PolicyTable> base_;
  RefinerOptions opts_;
  MpmcQueue<RefineReport> queue_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> mailbox_;

  // Consumer-side state.
  std::mutex consumer_mu_;
  PolicyTable working_;
  std::unordered_map<std::uint64_t, Avg> avg_;  // key: state * 32 + action bits
  std::uint32_t since_publish_ = 0;

  mutable std::mutex shadow_mu_;
  std::shared_ptr<const PolicyTable> shadow_;
  std::atomic<std::uint64_t> shadow_version_{0};

  std::atomic<bool> running_{false};
  std::thread thread_;
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> processed_{0};
  std::atomic<std::uint64_t> posted_{0};
  std::atomic<std::uint64_t> stale_{0};
};

}  // namespace atcc
