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

#include "atcc/lock_manager.hpp"

#include <algorithm>

#include "atcc/error.hpp"
#include "atcc/policy/table.hpp"

namespace atcc {

namespace {

bool same(const LockEntry& a, const LockEntry& b) { return a.ctx == b.ctx && a.attempt == b.attempt; }

LockEntry entry_of(TxnContext& ctx) { return LockEntry{&ctx, ctx.tid(), ctx.attempt()}; }

bool queued_before(const LockRequest& a, const LockRequest& b) {
  return compare(TxnRank{a.priority, a.who.tid}, TxnRank{b.priority, b.who.tid}) > 0;
}

bool preemptible(TxnState s) { return s == TxnState::kRunning || s == TxnState::kValidating; }

}  // namespace

LockManager::LockManager(RowStore& store, Runtime& rt, LockManagerOptions opts)
    : store_(store), rt_(rt), opts_(opts) {}

bool LockManager::live(const LockEntry& e) {
  TxnState s = e.ctx->state_of(e.attempt);
  return s == TxnState::kRunning || s == TxnState::kValidating || s == TxnState::kCommitting;
}

TxnRank LockManager::live_rank(const LockEntry& e) { return TxnRank{e.ctx->priority(), e.tid}; }

LockResult LockManager::rlock(Key key, TxnContext& ctx) { return acquire(key, ctx, LockMode::kRead); }

LockResult LockManager::wlock(Key key, TxnContext& ctx) { return acquire(key, ctx, LockMode::kWrite); }

void LockManager::erase_queue_at(Row& row, std::size_t i) {
  row.queue.erase(row.queue.begin() + static_cast<std::ptrdiff_t>(i));
  waiting_.fetch_sub(1, std::memory_order_relaxed);
}

void LockManager::enqueue(Row& row, LockRequest req) {
  auto pos = std::upper_bound(row.queue.begin(), row.queue.end(), req, queued_before);
  row.queue.insert(pos, req);
  waiting_.fetch_add(1, std::memory_order_relaxed);
}

void LockManager::purge(Row& row) {
  if (row.write_locked() && !live(row.owner)) {
    // A dead owner can never be committing: the latch is only set after the
    // non-preemptible transition.
    row.owner = LockEntry{};
    row.lock_word.store(Row::kFree, std::memory_order_release);
  }
  auto dead = std::remove_if(row.readers.begin(), row.readers.end(), [](const LockEntry& e) { return !live(e); });
  row.readers.erase(dead, row.readers.end());
  row.r_count.store(static_cast<std::uint32_t>(row.readers.size()), std::memory_order_release);
  for (std::size_t i = row.queue.size(); i-- > 0;) {
    const LockEntry& w = row.queue[i].who;
    if (w.ctx->state_of(w.attempt) == TxnState::kRunning || w.ctx->state_of(w.attempt) == TxnState::kValidating) {
      continue;
    }
    WaitState pending = WaitState::kPending;
    w.ctx->wait_state.compare_exchange_strong(pending, WaitState::kCancelled, std::memory_order_acq_rel);
    erase_queue_at(row, i);
  }
}

LockManager::Grant LockManager::try_grant(Row& row, const LockEntry& who, LockMode mode, bool from_queue) {
  const bool owns = row.write_locked() && same(row.owner, who);
  const bool reads = std::any_of(row.readers.begin(), row.readers.end(),
                                 [&](const LockEntry& e) { return same(e, who); });
  if (owns || (mode == LockMode::kRead && reads)) return Grant::kGranted;

  const TxnRank me = live_rank(who);
  if (!from_queue) {
    for (const LockRequest& q : row.queue) {
      if (same(q.who, who)) continue;
      if (compare(TxnRank{q.priority, q.who.tid}, me) > 0) return Grant::kWait;
      break;  // queue is sorted; the first other entry decides
    }
  }

  std::vector<LockEntry> victims;
  if (row.write_locked()) {
    if (row.committing()) return Grant::kWait;
    victims.push_back(row.owner);
  }
  if (mode == LockMode::kWrite) {
    for (const LockEntry& r : row.readers) {
      if (!same(r, who)) victims.push_back(r);
    }
  }
  for (const LockEntry& v : victims) {
    if (!preemptible(v.ctx->state_of(v.attempt))) return Grant::kWait;
    if (!outranks(me, live_rank(v))) return Grant::kWait;
  }
  for (const LockEntry& v : victims) {
    if (!v.ctx->wound(v.attempt, rt_)) return Grant::kWait;
  }
  if (!victims.empty()) {
    if (row.write_locked()) {
      row.owner = LockEntry{};
      row.lock_word.store(Row::kFree, std::memory_order_release);
    }
    if (mode == LockMode::kWrite) {
      row.readers.erase(std::remove_if(row.readers.begin(), row.readers.end(),
                                       [&](const LockEntry& e) { return !same(e, who); }),
                        row.readers.end());
    }
  }

  if (mode == LockMode::kRead) {
    row.readers.push_back(who);
  } else {
    row.owner = who;
    row.lock_word.store(who.tid.order_key(), std::memory_order_release);
  }
  row.r_count.store(static_cast<std::uint32_t>(row.readers.size()), std::memory_order_release);
  return Grant::kGranted;
}

void LockManager::grant_waiters(Row& row) {
  purge(row);
  while (!row.queue.empty()) {
    LockRequest head = row.queue.front();
    if (try_grant(row, head.who, head.mode, /*from_queue=*/true) != Grant::kGranted) break;
    erase_queue_at(row, 0);
    WaitState pending = WaitState::kPending;
    if (head.who.ctx->wait_state.compare_exchange_strong(pending, WaitState::kGranted, std::memory_order_acq_rel)) {
      rt_.unpark(head.who.ctx->parker());
    }
  }
}

LockResult LockManager::acquire(Key key, TxnContext& ctx, LockMode mode) {
  Row& row = store_.row(key);
  const std::uint64_t attempt = ctx.attempt();
  {
    std::lock_guard lk(row.latch);
    if (!preemptible(ctx.state_of(attempt))) return LockResult::kAborted;
    purge(row);
    LockEntry who = entry_of(ctx);
    if (try_grant(row, who, mode, /*from_queue=*/false) == Grant::kGranted) return LockResult::kGranted;
    ctx.wait_state.store(WaitState::kPending, std::memory_order_release);
    ctx.waiting_mode.store(mode, std::memory_order_relaxed);
    ctx.waiting_row.store(&row, std::memory_order_release);
    enqueue(row, LockRequest{who, mode, ctx.priority()});
  }
  return wait(row, ctx, attempt);
}

LockResult LockManager::wait(Row& row, TxnContext& ctx, std::uint64_t attempt) {
  BlockingRegion blocking;
  const Nanos start = rt_.now();
  const Nanos deadline = start + opts_.wait_timeout;
  LockResult result = LockResult::kAborted;
  for (;;) {
    if (ctx.state_of(attempt) == TxnState::kAborted) break;
    WaitState ws = ctx.wait_state.load(std::memory_order_acquire);
    if (ws == WaitState::kGranted) {
      result = LockResult::kGranted;
      break;
    }
    if (ws == WaitState::kCancelled) break;
    Nanos now = rt_.now();
    if (now >= deadline) {
      timeouts_.fetch_add(1, std::memory_order_relaxed);
      if (ctx.transition(TxnState::kRunning, TxnState::kAborted) ||
          ctx.transition(TxnState::kValidating, TxnState::kAborted)) {
        ctx.abort_reason = AbortReason::kLockTimeout;
      }
      break;
    }
    rt_.park_until(ctx.parker(), std::min(deadline, now + opts_.wait_slice));
    if (slice_hook_ && ctx.wait_state.load(std::memory_order_acquire) == WaitState::kPending) slice_hook_(ctx, rt_.now() - start);
  }
  if (result != LockResult::kGranted) leave_queue(row, ctx, attempt);
  ctx.stats.blocked_ms += to_ms(rt_.now() - start);
  ctx.waiting_row.store(nullptr, std::memory_order_release);
  ctx.wait_state.store(WaitState::kNone, std::memory_order_release);
  return result;
}

void LockManager::leave_queue(Row& row, TxnContext& ctx, std::uint64_t attempt) {
  std::lock_guard lk(row.latch);
  for (std::size_t i = 0; i < row.queue.size(); ++i) {
    if (row.queue[i].who.ctx == &ctx && row.queue[i].who.attempt == attempt) {
      erase_queue_at(row, i);
      break;
    }
  }
  grant_waiters(row);
}

void LockManager::release_and_handover(TxnContext& ctx) {
  const std::uint64_t attempt = ctx.attempt();
  std::vector<Key>& keys = ctx.lock_keys;
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (Key key : keys) {
    Row& row = store_.row(key);
    std::lock_guard lk(row.latch);
    if (row.write_locked() && row.owner.ctx == &ctx && row.owner.attempt == attempt) {
      row.owner = LockEntry{};
      row.lock_word.store(Row::kFree, std::memory_order_release);
    }
    auto mine = [&](const LockEntry& e) { return e.ctx == &ctx && e.attempt == attempt; };
    row.readers.erase(std::remove_if(row.readers.begin(), row.readers.end(), mine), row.readers.end());
    row.r_count.store(static_cast<std::uint32_t>(row.readers.size()), std::memory_order_release);
    for (std::size_t i = row.queue.size(); i-- > 0;) {
      if (mine(row.queue[i].who)) erase_queue_at(row, i);
    }
    grant_waiters(row);
  }
  keys.clear();
}

void LockManager::reevaluate_pending(TxnContext& ctx) {
  reevaluate_calls_.fetch_add(1, std::memory_order_relaxed);
  if (!opts_.reevaluate_on_boost) return;
  Row* row = ctx.waiting_row.load(std::memory_order_acquire);
  if (row == nullptr) return;
  std::lock_guard lk(row->latch);
  const std::uint64_t attempt = ctx.attempt();
  auto it = std::find_if(row->queue.begin(), row->queue.end(), [&](const LockRequest& q) {
    return q.who.ctx == &ctx && q.who.attempt == attempt;
  });
  if (it == row->queue.end()) return;
  it->priority = ctx.priority();
  std::stable_sort(row->queue.begin(), row->queue.end(), queued_before);
  grant_waiters(*row);
}

LockManager::RowView LockManager::snapshot(Key key) {
  Row& row = store_.row(key);
  std::lock_guard lk(row.latch);
  RowView v;
  v.key = key;
  v.committing = row.committing();
  if (row.write_locked()) v.holders.push_back(Holder{row.owner.tid, live_rank(row.owner), LockMode::kWrite});
  for (const LockEntry& r : row.readers) v.holders.push_back(Holder{r.tid, live_rank(r), LockMode::kRead});
  for (const LockRequest& q : row.queue) {
    v.waiters.push_back(Holder{q.who.tid, TxnRank{q.priority, q.who.tid}, q.mode});
  }
  return v;
}

}  // namespace atcc
