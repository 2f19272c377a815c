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
#include <string>
#include <unordered_map>
#include <vector>

#include "atcc/action.hpp"
#include "atcc/policy/features.hpp"
#include "atcc/priority.hpp"
#include "atcc/row_store.hpp"
#include "atcc/runtime.hpp"
#include "atcc/tid.hpp"
#include "atcc/txn_stats.hpp"

namespace atcc {

enum class TxnKind : std::uint8_t { kAgentic, kBackground };

enum class TxnState : std::uint8_t { kIdle, kRunning, kValidating, kCommitting, kAborted };

const char* to_string(TxnState s);

// Why an attempt ended in abort.
enum class AbortReason : std::uint8_t {
  kNone,
  kWounded,
  kValidation,   // stale read version at commit
  kEscalation,   // stale read found by retroactive validation
  kLockTimeout,  // wait safety valve
  kUser,
};

const char* to_string(AbortReason r);

struct ReadEntry {
  Key key;
  Version version;  // first version observed
  bool hot;
  bool locked = false;  // read lock taken by this attempt
};

struct WriteEntry {
  Key key;
  std::string payload;
  bool hot;
  bool locked = false;  // write lock taken before commit
};

// One policy decision, kept until the attempt ends so the terminal reward
// can be credited to it.
struct DecisionRecord {
  StateKey state;
  ActionSet action;
  GlobalMetrics metrics;
  std::uint64_t sql_count = 0;
  double interval_ms = 0;
};

enum class WaitState : std::uint8_t { kNone, kPending, kGranted, kCancelled };

// One worker slot's transaction record. Fields written only by the owning
// worker are plain; fields other threads read or change (state, tid,
// priority, wait bookkeeping) are atomics.
class TxnContext {
 public:
  explicit TxnContext(WorkerId wid) : wid_(wid) {}
  TxnContext(const TxnContext&) = delete;
  TxnContext& operator=(const TxnContext&) = delete;

  WorkerId wid() const { return wid_; }

  TransactionId tid() const { return TransactionId::from_raw(tid_.load(std::memory_order_acquire)); }
  std::uint64_t attempt() const { return state_word_.load(std::memory_order_acquire) >> 8; }
  TxnState state() const { return static_cast<TxnState>(state_word_.load(std::memory_order_acquire) & 0xff); }
  // State of a specific attempt; kIdle when the context has moved on.
  TxnState state_of(std::uint64_t attempt) const;
  Priority priority() const { return Priority{priority_.load(std::memory_order_acquire)}; }
  TxnRank rank() const { return TxnRank{priority(), tid()}; }

  // Marks the given attempt aborted if it is Running or Validating, sets the
  // tid status bit and wakes the worker. Returns true if the attempt is (now
  // or already) aborted, false if it is committing or has ended.
  bool wound(std::uint64_t attempt, Runtime& rt);

  // Owner-side transitions.
  void start_attempt(TransactionId tid, Priority p);
  bool transition(TxnState from, TxnState to);
  void set_idle();
  void raise_priority(Priority p);

  Parker& parker() { return parker_; }

  // Wait bookkeeping, shared with granters.
  std::atomic<WaitState> wait_state{WaitState::kNone};
  std::atomic<Row*> waiting_row{nullptr};
  std::atomic<LockMode> waiting_mode{LockMode::kRead};

  // Owner-only transaction data.
  TxnKind kind = TxnKind::kBackground;
  ActionSet action;
  bool dynamic_priority = false;
  AbortReason abort_reason = AbortReason::kNone;
  TxnStats stats;
  std::vector<ReadEntry> rs;
  std::unordered_map<Key, std::size_t> rs_index;
  std::vector<WriteEntry> ws;
  std::unordered_map<Key, std::size_t> ws_index;
  // Rows on which this attempt may hold a lock; recorded before acquisition.
  std::vector<Key> lock_keys;
  std::vector<DecisionRecord> decisions;
  std::uint64_t serial = 0;  // history serial of the attempt
  Nanos first_begin{0};      // submission time of the logical transaction

 private:
  static constexpr std::uint64_t pack_state(std::uint64_t attempt, TxnState s) {
    return (attempt << 8) | static_cast<std::uint64_t>(s);
  }

  WorkerId wid_;
  std::atomic<std::uint64_t> tid_{kInvalidTid.raw()};
  std::atomic<std::uint64_t> state_word_{0};
  std::atomic<std::uint64_t> priority_{0};
  Parker parker_;
};

}  // namespace atcc
