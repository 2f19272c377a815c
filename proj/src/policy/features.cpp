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

#include "atcc/policy/features.hpp"

#include <algorithm>
#include <sstream>

#include "atcc/error.hpp"

namespace atcc {

void MetricsBoard::publish(const GlobalMetrics& m) {
  abort_rate_.store(m.abort_rate, std::memory_order_relaxed);
  tps_.store(m.tps, std::memory_order_relaxed);
  avg_latency_ms_.store(m.avg_latency_ms, std::memory_order_relaxed);
  tail_latency_ms_.store(m.tail_latency_ms, std::memory_order_relaxed);
  lock_queue_len_.store(m.lock_queue_len, std::memory_order_relaxed);
}

GlobalMetrics MetricsBoard::read() const {
  return GlobalMetrics{abort_rate_.load(std::memory_order_relaxed), tps_.load(std::memory_order_relaxed),
                       avg_latency_ms_.load(std::memory_order_relaxed),
                       tail_latency_ms_.load(std::memory_order_relaxed),
                       lock_queue_len_.load(std::memory_order_relaxed)};
}

double jaccard(const std::unordered_set<Key>& a, const std::unordered_set<Key>& b) {
  if (a.empty() && b.empty()) return 0.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::size_t inter = 0;
  for (Key k : small) inter += large.count(k);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

FeatureVector extract_features(const TxnStats& stats, std::size_t rs_size, std::size_t ws_size, Nanos now,
                               const GlobalMetrics& global) {
  FeatureVector fv;
  fv.interval_ms = stats.sql_count == 0 ? 0.0 : std::max(0.0, to_ms(now - stats.last_op_end));
  fv.rs_delta = static_cast<double>(rs_size - std::min(rs_size, stats.rs_at_round_start));
  fv.ws_delta = static_cast<double>(ws_size - std::min(ws_size, stats.ws_at_round_start));
  fv.overlap_ratio = jaccard(stats.round_keys, stats.prev_round_keys);
  fv.consecutive_writes = static_cast<double>(stats.consecutive_writes);
  fv.hot_access_ratio = stats.hot_access_ratio();
  fv.blocked_ms = stats.blocked_ms;
  fv.retry_count = static_cast<double>(stats.retry_count);
  fv.global = global;
  return fv;
}

void close_round(TxnStats& stats, std::size_t rs_size, std::size_t ws_size) {
  stats.prev_round_keys.swap(stats.round_keys);
  stats.round_keys.clear();
  stats.rs_at_round_start = rs_size;
  stats.ws_at_round_start = ws_size;
}

const char* feature_name(Feature f) {
  switch (f) {
    case Feature::kInterval: return "interval_ms";
    case Feature::kRsDelta: return "rs_delta";
    case Feature::kWsDelta: return "ws_delta";
    case Feature::kOverlap: return "overlap_ratio";
    case Feature::kConsecutiveWrites: return "consecutive_writes";
    case Feature::kHotRatio: return "hot_access_ratio";
    case Feature::kBlocked: return "blocked_ms";
    case Feature::kRetries: return "retry_count";
    case Feature::kAbortRate: return "abort_rate";
    case Feature::kLockQueue: return "lock_queue_len";
  }
  return "?";
}

BucketSpec BucketSpec::defaults() {
  BucketSpec s;
  s.bounds = {{
      {50, 500, 2000},  // interval ms
      {1, 4},           // rs delta: 0, 1-3, >=4
      {1, 4},           // ws delta
      {0.3, 0.7},       // overlap
      {1, 2},           // consecutive writes: 0, 1, >=2
      {0.2, 0.6},       // hot ratio
      {10, 200},        // blocked ms
      {1, 2},           // retries: 0, 1, >=2
      {0.05, 0.3},      // abort rate
      {1, 5},           // lock queue: 0, 1-4, >=5
  }};
  return s;
}

void BucketSpec::validate() const {
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const auto& b = bounds[f];
    if (!std::is_sorted(b.begin(), b.end()) || std::adjacent_find(b.begin(), b.end()) != b.end()) {
      throw ConfigError(std::string("bucket boundaries for ") + feature_name(static_cast<Feature>(f)) +
                        " must be strictly increasing");
    }
    if (b.size() + 1 > 255) throw ConfigError("too many buckets");
  }
  if (state_count() > 100'000'000) throw ConfigError("bucket spec produces too many states");
}

std::size_t BucketSpec::state_count() const {
  std::size_t n = 1;
  for (const auto& b : bounds) n *= b.size() + 1;
  return n;
}

namespace {

double feature_value(const FeatureVector& fv, std::size_t f) {
  switch (static_cast<Feature>(f)) {
    case Feature::kInterval: return fv.interval_ms;
    case Feature::kRsDelta: return fv.rs_delta;
    case Feature::kWsDelta: return fv.ws_delta;
    case Feature::kOverlap: return fv.overlap_ratio;
    case Feature::kConsecutiveWrites: return fv.consecutive_writes;
    case Feature::kHotRatio: return fv.hot_access_ratio;
    case Feature::kBlocked: return fv.blocked_ms;
    case Feature::kRetries: return fv.retry_count;
    case Feature::kAbortRate: return fv.global.abort_rate;
    case Feature::kLockQueue: return fv.global.lock_queue_len;
  }
  return 0;
}

}  // namespace

StateKey discretize(const FeatureVector& fv, const BucketSpec& spec) {
  StateKey key;
  std::uint32_t index = 0;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const auto& b = spec.bounds[f];
    auto bucket = static_cast<std::uint32_t>(std::upper_bound(b.begin(), b.end(), feature_value(fv, f)) - b.begin());
    key.bucket[f] = static_cast<std::uint8_t>(bucket);
    index = index * static_cast<std::uint32_t>(b.size() + 1) + bucket;
  }
  key.index = index;
  return key;
}

StateKey key_from_index(std::uint32_t index, const BucketSpec& spec) {
  StateKey key;
  key.index = index;
  for (std::size_t f = kNumFeatures; f-- > 0;) {
    auto radix = static_cast<std::uint32_t>(spec.bounds[f].size() + 1);
    key.bucket[f] = static_cast<std::uint8_t>(index % radix);
    index /= radix;
  }
  return key;
}

std::string StateKey::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t f = 0; f < kNumFeatures; ++f) os << (f ? "," : "") << int(bucket[f]);
  os << ')';
  return os.str();
}

}  // namespace atcc
