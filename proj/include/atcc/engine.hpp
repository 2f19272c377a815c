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
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "atcc/history.hpp"
#include "atcc/lock_manager.hpp"
#include "atcc/policy/decider.hpp"
#include "atcc/policy/features.hpp"
#include "atcc/priority.hpp"
#include "atcc/row_store.hpp"
#include "atcc/runtime.hpp"
#include "atcc/txn_context.hpp"
#include "atcc/wal.hpp"

namespace atcc {

enum class Protocol : std::uint8_t { kOcc, kWoundWait, kAtcc };

const char* to_string(Protocol p);
// Accepts "occ", "wound_wait", "atcc". Throws ConfigError.
Protocol parse_protocol(std::string_view text);

enum class Status : std::uint8_t { kOk, kAborted };

struct EngineOptions {
  Protocol protocol = Protocol::kAtcc;
  std::size_t max_workers = 64;
  PriorityParams priority;
  // The policy runs before operation 0, K, 2K, ... of every attempt.
  unsigned policy_every_k = 3;
  LockManagerOptions locks;
  BucketSpec buckets = BucketSpec::defaults();
  // Empty: commit records are framed and counted but not written.
  std::string wal_path;
  bool record_history = false;
};

// Totals across all worker slots.
struct EngineCounters {
  std::array<std::uint64_t, 2> commits{};  // by TxnKind
  std::array<std::uint64_t, 2> aborts{};
  std::array<std::array<std::uint64_t, 6>, 2> aborts_by_reason{};  // [TxnKind][AbortReason]
  std::array<std::uint64_t, 32> decisions{};  // by ActionSet bits
  std::uint64_t boosts = 0;
  std::uint64_t escalations = 0;

  std::uint64_t total_commits() const { return commits[0] + commits[1]; }
  std::uint64_t total_aborts() const { return aborts[0] + aborts[1]; }
};

class Session;

// Transaction engine over one RowStore. Workers open a Session each; the
// session's context lives in a fixed slot array indexed by worker id so any
// thread can find the owner of a lock.
class Engine {
 public:
  Engine(RowStore& store, Runtime& rt, EngineOptions opts, Decider* decider = nullptr);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Claims a free worker slot. Throws AdmissionError when none is left.
  Session open_session();

  const EngineOptions& options() const { return opts_; }
  Protocol protocol() const { return opts_.protocol; }
  RowStore& store() { return store_; }
  Runtime& runtime() { return rt_; }
  LockManager& locks() { return locks_; }
  MetricsBoard& metrics() { return metrics_; }
  History* history() { return history_.get(); }
  const WriteAheadLog& wal() const { return *wal_; }
  Decider* decider() const { return decider_; }
  void set_decider(Decider* d) { decider_ = d; }

  // Context of worker `wid`, or nullptr when the slot has never been used.
  TxnContext* context(WorkerId wid);

  // Raises ctx's priority to `p` (never lowers it) and re-evaluates its
  // pending lock request.
  void boost_priority(TxnContext& ctx, Priority p);

  EngineCounters counters() const;
  std::uint64_t last_csn() const { return csn_.load(std::memory_order_acquire); }

 private:
  friend class Session;

  struct alignas(64) Slot {
    explicit Slot(WorkerId wid) : ctx(wid) {}
    TxnContext ctx;
    std::atomic<bool> in_use{false};
    std::uint64_t last_start_ts = 0;
    // Written by the owner only, read by counters().
    std::array<std::atomic<std::uint64_t>, 2> commits{};
    std::array<std::atomic<std::uint64_t>, 2> aborts{};
    std::array<std::array<std::atomic<std::uint64_t>, 6>, 2> aborts_by_reason{};
    std::array<std::atomic<std::uint64_t>, 32> decisions{};
    std::atomic<std::uint64_t> boosts{0};
    std::atomic<std::uint64_t> escalations{0};
  };

  static void bump(std::atomic<std::uint64_t>& c) { c.store(c.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed); }

  Slot& slot_of(const TxnContext& ctx) { return *slots_[ctx.wid()]; }
  void release_slot(WorkerId wid);
  std::uint64_t next_start_ts() { return start_ts_.fetch_add(1, std::memory_order_relaxed) + 1; }
  std::uint64_t next_serial() { return serial_.fetch_add(1, std::memory_order_relaxed) + 1; }
  void record(EventType type, const TxnContext& ctx, Key key = 0, Version version = 0, std::uint64_t csn = 0);
  // True if the write owner of `row` (other than `me`) has begun validating
  // or committing.
  bool owner_in_commit(const Row& row, TransactionId me);
  void slice_hook(TxnContext& ctx, Nanos waited);

  RowStore& store_;
  Runtime& rt_;
  EngineOptions opts_;
  Decider* decider_;
  LockManager locks_;
  MetricsBoard metrics_;
  std::unique_ptr<History> history_;
  std::unique_ptr<WriteAheadLog> wal_;
  std::vector<std::unique_ptr<Slot>> slots_;
  std::atomic<std::uint64_t> start_ts_{0};
  std::atomic<std::uint64_t> serial_{0};
  std::atomic<std::uint64_t> csn_{0};
  std::mutex commit_mu_;
};

// A worker's handle on the engine: one transaction at a time. Operations
// return kAborted once the current attempt is aborted; the attempt is
// already cleaned up by then and the caller decides between restart() and
// begin().
class Session {
 public:
  Session(Session&& o) noexcept;
  Session& operator=(Session&&) = delete;
  ~Session();

  TxnContext& ctx() { return *ctx_; }
  const TxnContext& ctx() const { return *ctx_; }
  Engine& engine() { return *eng_; }

  // Starts a new logical transaction with a fresh start timestamp.
  void begin(TxnKind kind);
  // Retries the last logical transaction after an abort. Keeps the start
  // timestamp and increments the retry count.
  void restart();

  Status read(Key key, std::string* out = nullptr);
  Status write(Key key, std::string_view payload);
  // Validates and commits. On success stores the commit sequence number.
  Status commit(Version* csn_out = nullptr);
  // Voluntary abort.
  void abort();
  // Widens the locking scope to `next` (merged with the current action).
  Status apply_action_change(ActionSet next);
  // Idle time between operations; cut short when the attempt is wounded.
  Status think(Nanos duration);

  bool active() const { return phase_ == Phase::kActive; }
  bool aborted() const { return phase_ == Phase::kAborted; }
  bool committed() const { return phase_ == Phase::kCommitted; }

 private:
  friend class Engine;
  enum class Phase { kIdle, kActive, kCommitted, kAborted };

  Session(Engine& eng, TxnContext& ctx) : eng_(&eng), ctx_(&ctx) {}

  void start_attempt(std::uint64_t start_ts, std::uint64_t retry_count);
  // Common prologue of read and write: wound check, policy, stats.
  bool enter_op();
  void finish_op(Key key, bool hot, bool is_write);
  Status maybe_invoke_policy();
  Status lock_read_entry(ReadEntry& e);
  Status fail(AbortReason reason);
  void cleanup_abort(AbortReason reason);
  void recompute_priority();

  Engine* eng_;
  TxnContext* ctx_;
  Phase phase_ = Phase::kIdle;
  TxnKind kind_ = TxnKind::kBackground;
  std::uint64_t start_ts_ = 0;
  static constexpr std::uint64_t kNoDecision = ~std::uint64_t{0};
  std::uint64_t last_policy_at_ = kNoDecision;
};

}  // namespace atcc
