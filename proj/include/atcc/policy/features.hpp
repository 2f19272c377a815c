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
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "atcc/runtime.hpp"
#include "atcc/txn_stats.hpp"

namespace atcc {

// System-wide signals over the last metrics window.
struct GlobalMetrics {
  double abort_rate = 0;
  double tps = 0;
  double avg_latency_ms = 0;
  double tail_latency_ms = 0;
  double lock_queue_len = 0;
};

// Latest published GlobalMetrics. Each field is read independently, which is
// good enough for a policy input and keeps readers wait-free.
class MetricsBoard {
 public:
  void publish(const GlobalMetrics& m);
  GlobalMetrics read() const;

 private:
  std::atomic<double> abort_rate_{0};
  std::atomic<double> tps_{0};
  std::atomic<double> avg_latency_ms_{0};
  std::atomic<double> tail_latency_ms_{0};
  std::atomic<double> lock_queue_len_{0};
};

struct FeatureVector {
  double interval_ms = 0;
  double rs_delta = 0;
  double ws_delta = 0;
  double overlap_ratio = 0;
  double consecutive_writes = 0;
  double hot_access_ratio = 0;
  double blocked_ms = 0;
  double retry_count = 0;
  GlobalMetrics global;
};

// |a ∩ b| / |a ∪ b|, 0 when both are empty.
double jaccard(const std::unordered_set<Key>& a, const std::unordered_set<Key>& b);

// Features at a decision point. `now` is the start of the operation about to
// run, so the interval is the think time that preceded it.
FeatureVector extract_features(const TxnStats& stats, std::size_t rs_size, std::size_t ws_size, Nanos now,
                               const GlobalMetrics& global);

// Starts the next decision round: the current round's read keys become the
// previous round and the set-size baselines move up.
void close_round(TxnStats& stats, std::size_t rs_size, std::size_t ws_size);

enum class Feature : std::uint8_t {
  kInterval,
  kRsDelta,
  kWsDelta,
  kOverlap,
  kConsecutiveWrites,
  kHotRatio,
  kBlocked,
  kRetries,
  kAbortRate,
  kLockQueue,
};
inline constexpr std::size_t kNumFeatures = 10;

const char* feature_name(Feature f);

// Sorted lower boundaries per feature. A value v falls in bucket i when
// exactly i boundaries are <= v, so k boundaries give k+1 buckets and values
// past either end clamp to the edge buckets.
struct BucketSpec {
  std::array<std::vector<double>, kNumFeatures> bounds;

  static BucketSpec defaults();

  // Throws ConfigError when a boundary list is unsorted or a bucket count
  // exceeds 255.
  void validate() const;
  std::size_t buckets(Feature f) const { return bounds[static_cast<std::size_t>(f)].size() + 1; }
  std::size_t state_count() const;
  bool operator==(const BucketSpec&) const = default;
};

struct StateKey {
  std::array<std::uint8_t, kNumFeatures> bucket{};
  std::uint32_t index = 0;  // mixed-radix position in the dense table

  bool operator==(const StateKey& o) const { return index == o.index; }
  std::string to_string() const;
};

StateKey discretize(const FeatureVector& fv, const BucketSpec& spec);
// Rebuilds a key from its dense index.
StateKey key_from_index(std::uint32_t index, const BucketSpec& spec);

}  // namespace atcc
