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
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atcc/priority.hpp"
#include "atcc/runtime.hpp"
#include "atcc/tid.hpp"

namespace atcc {

using Key = std::uint64_t;
using Version = std::uint64_t;

class TxnContext;

enum class LockMode : std::uint8_t { kRead, kWrite };

// A lock holder or waiter. `attempt` pins the entry to one execution attempt
// of the context so that a recycled context is never mistaken for the
// transaction that registered the entry.
struct LockEntry {
  TxnContext* ctx = nullptr;
  TransactionId tid;
  std::uint64_t attempt = 0;
};

struct LockRequest {
  LockEntry who;
  LockMode mode = LockMode::kRead;
  Priority priority;  // snapshot, refreshed on re-evaluation
};

// Per-row metadata. The lock word carries the write owner and the committing
// latch in one atomic so both change together:
//   bit 63      committing
//   bits 0..62  order key of the write owner, or kFree
// Everything else about locks (reader list, queue, owner entry) is guarded by
// `latch`, which is never held across a wait.
class Row {
 public:
  static constexpr std::uint64_t kCommittingBit = std::uint64_t{1} << 63;
  static constexpr std::uint64_t kFree = kInvalidTid.raw();

  std::atomic<std::uint64_t> lock_word{kFree};
  std::atomic<Version> version{0};
  std::atomic<std::uint32_t> r_count{0};
  std::atomic<bool> hot{false};
  std::atomic<std::uint32_t> epoch_access{0};
  std::atomic<std::uint32_t> epoch_writes{0};

  std::mutex latch;
  LockEntry owner;  // valid iff lock word is not free
  std::vector<LockEntry> readers;
  std::vector<LockRequest> queue;  // strictly ordered by rank, best first

  bool committing() const { return (lock_word.load(std::memory_order_acquire) & kCommittingBit) != 0; }
  bool write_locked() const {
    return (lock_word.load(std::memory_order_acquire) & ~kCommittingBit) != kFree;
  }
};

struct RowSnapshot {
  std::string payload;
  Version version = 0;
};

// Dense table of rows with keys 0..size()-1. Payloads live in a fixed number of
// 64-bit atomic words per row and are copied under a version/latch seqlock, so
// a reader never sees a torn payload and never takes a lock.
class RowStore {
 public:
  RowStore(std::size_t num_rows, std::size_t payload_capacity);
  ~RowStore();

  RowStore(const RowStore&) = delete;
  RowStore& operator=(const RowStore&) = delete;

  std::size_t size() const { return num_rows_; }
  std::size_t payload_capacity() const { return capacity_; }

  // Throws NotFoundError.
  Row& row(Key key);
  const Row& row(Key key) const;
  bool contains(Key key) const { return key < num_rows_; }

  // Bulk load before any transaction runs; version stays 0.
  void load(Key key, std::string_view payload);

  // Returns a payload/version pair that existed together at some instant.
  // Spins while the committing latch is set; `rt` supplies the backoff.
  RowSnapshot read_latest_committed(Key key, Runtime& rt) const;

  // Version without payload, same consistency rules as above.
  Version current_version(Key key) const;

  // Requires the committing latch and csn > current version. Throws
  // InvariantViolation otherwise.
  void install_version(Key key, std::string_view payload, Version csn);

  // Committing latch controls. The caller must own the write lock.
  void set_committing(Key key, TransactionId owner);
  void clear_committing(Key key);

  // Epoch statistics.
  void note_access(Key key, bool is_write);

  // Closes the current epoch: flags the top `threshold_fraction` of keys
  // (by access count, at least `min_accesses`), clears the rest, resets the
  // counters, and returns the keys whose flag flipped. An epoch with no
  // qualifying key changes nothing.
  std::vector<Key> update_hot_flags(double threshold_fraction, std::uint32_t min_accesses = 2);

  // Clears every hot flag and the epoch counters.
  void reset_hot_flags();

  // Rewinds every row to version 0, keeping payloads, so that a new engine
  // can start its commit sequence at 1. Only valid while no transaction runs.
  void reset_versions();

  std::size_t hot_count() const { return hot_count_.load(std::memory_order_relaxed); }
  std::uint64_t epoch() const { return epoch_.load(std::memory_order_relaxed); }

 private:
  void check_key(Key key) const;
  std::size_t words_per_row() const { return words_; }
  std::atomic<std::uint64_t>* words(Key key) const { return payload_.get() + key * words_; }
  void store_payload(Key key, std::string_view payload);

  std::size_t num_rows_;
  std::size_t capacity_;
  std::size_t words_;  // one length word plus payload words
  std::unique_ptr<Row[]> rows_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> payload_;
  std::atomic<std::size_t> hot_count_{0};
  std::atomic<std::uint64_t> epoch_{0};
};

}  // namespace atcc
