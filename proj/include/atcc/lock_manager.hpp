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
#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

#include "atcc/row_store.hpp"
#include "atcc/runtime.hpp"
#include "atcc/txn_context.hpp"

namespace atcc {

struct LockManagerOptions {
  // Safety valve: a waiter gives up and aborts after this long.
  Nanos wait_timeout = std::chrono::seconds(60);
  // Waiters wake at least this often to run the slice hook.
  Nanos wait_slice = std::chrono::milliseconds(10);
  // Re-run the wound check of pending requests when a waiter is boosted.
  // Turning it off exists only to demonstrate the deadlock it prevents.
  bool reevaluate_on_boost = true;
};

enum class LockResult : std::uint8_t { kGranted, kAborted };

// Priority-preemptive reader/writer locks over RowStore rows.
//
// A request is granted when every conflicting holder ranks below the
// requester and is preemptible; those holders are wounded and the lock moves
// immediately. Otherwise the requester queues in rank order and parks. A
// request also queues behind any better-ranked queued request, so wait-for
// edges always point toward higher rank.
class LockManager {
 public:
  LockManager(RowStore& store, Runtime& rt, LockManagerOptions opts = {});

  LockResult rlock(Key key, TxnContext& ctx);
  LockResult wlock(Key key, TxnContext& ctx);

  // Drops every lock the current attempt of `ctx` holds on ctx.lock_keys and
  // hands each row to its best waiters. Rows already taken over by a wounder
  // are skipped.
  void release_and_handover(TxnContext& ctx);

  // Re-checks the pending request of `ctx` against the holders after its
  // priority grew. No-op when ctx is not waiting or re-evaluation is off.
  void reevaluate_pending(TxnContext& ctx);

  // Called on the waiter's thread each time it wakes while still queued,
  // with the time waited so far.
  void set_slice_hook(std::function<void(TxnContext&, Nanos)> hook) { slice_hook_ = std::move(hook); }

  void set_reevaluate_on_boost(bool on) { opts_.reevaluate_on_boost = on; }
  const LockManagerOptions& options() const { return opts_; }

  // Number of queued requests across all rows.
  std::uint64_t waiting_count() const { return waiting_.load(std::memory_order_relaxed); }
  std::uint64_t reevaluate_calls() const { return reevaluate_calls_.load(std::memory_order_relaxed); }
  std::uint64_t timeouts() const { return timeouts_.load(std::memory_order_relaxed); }

  // Test-only view of one row.
  struct Holder {
    TransactionId tid;
    TxnRank rank;
    LockMode mode;
  };
  struct RowView {
    Key key;
    bool committing = false;
    std::vector<Holder> holders;
    std::vector<Holder> waiters;  // queue order
  };
  RowView snapshot(Key key);

 private:
  enum class Grant { kGranted, kWait };

  LockResult acquire(Key key, TxnContext& ctx, LockMode mode);
  LockResult wait(Row& row, TxnContext& ctx, std::uint64_t attempt);
  void leave_queue(Row& row, TxnContext& ctx, std::uint64_t attempt);

  // All of these require row.latch.
  Grant try_grant(Row& row, const LockEntry& who, LockMode mode, bool from_queue);
  void grant_waiters(Row& row);
  void purge(Row& row);
  void enqueue(Row& row, LockRequest req);
  void erase_queue_at(Row& row, std::size_t i);

  static bool live(const LockEntry& e);
  static TxnRank live_rank(const LockEntry& e);

  RowStore& store_;
  Runtime& rt_;
  LockManagerOptions opts_;
  std::function<void(TxnContext&, Nanos)> slice_hook_;
  std::atomic<std::uint64_t> waiting_{0};
  std::atomic<std::uint64_t> reevaluate_calls_{0};
  std::atomic<std::uint64_t> timeouts_{0};
};

}  // namespace atcc
