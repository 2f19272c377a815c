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

#include <gtest/gtest.h>

#include <future>
#include <memory>
#include <vector>

#include "atcc/lock_manager.hpp"
#include "atcc/rng.hpp"
#include "atcc/row_store.hpp"
#include "atcc/runtime.hpp"
#include "atcc/txn_context.hpp"
#include "test_support.hpp"

namespace atcc {
namespace {

using namespace std::chrono_literals;
using testing_support::eventually;

class LockManagerTest : public ::testing::Test {
 protected:
  LockManagerTest() : store_(8, 16), locks_(store_, rt_) {}

  // A running transaction with the given age (start timestamp) and priority.
  TxnContext& txn(std::uint64_t ts, std::uint64_t prio = 0) {
    auto wid = static_cast<WorkerId>(ctxs_.size());
    ctxs_.push_back(std::make_unique<TxnContext>(wid));
    TxnContext& c = *ctxs_.back();
    c.start_attempt(TransactionId::pack(wid, ts, TxnStatus::kRunning), Priority{prio});
    return c;
  }

  LockResult lock(TxnContext& c, Key k, LockMode m) {
    c.lock_keys.push_back(k);
    return m == LockMode::kRead ? locks_.rlock(k, c) : locks_.wlock(k, c);
  }

  std::future<LockResult> lock_async(TxnContext& c, Key k, LockMode m) {
    return std::async(std::launch::async, [this, &c, k, m] { return lock(c, k, m); });
  }

  std::size_t waiters(Key k) { return locks_.snapshot(k).waiters.size(); }

  RealRuntime rt_;
  RowStore store_;
  LockManager locks_;
  std::vector<std::unique_ptr<TxnContext>> ctxs_;
};

TEST_F(LockManagerTest, ReadOnFreeRowIsGranted) {
  TxnContext& a = txn(1);
  ASSERT_EQ(store_.row(0).r_count.load(), 0u);
  EXPECT_EQ(lock(a, 0, LockMode::kRead), LockResult::kGranted);
  EXPECT_EQ(store_.row(0).r_count.load(), 1u);
}

TEST_F(LockManagerTest, ReaderWoundsLowerRankedWriter) {
  TxnContext& w = txn(5, 1);
  TxnContext& r = txn(9, 3);
  ASSERT_EQ(lock(w, 0, LockMode::kWrite), LockResult::kGranted);
  EXPECT_EQ(lock(r, 0, LockMode::kRead), LockResult::kGranted);
  EXPECT_EQ(w.state(), TxnState::kAborted);
  EXPECT_FALSE(store_.row(0).write_locked());
}

TEST_F(LockManagerTest, ReaderWaitsForHigherRankedWriterUntilHandover) {
  TxnContext& w = txn(1, 5);
  TxnContext& r = txn(2, 0);
  ASSERT_EQ(lock(w, 0, LockMode::kWrite), LockResult::kGranted);
  auto f = lock_async(r, 0, LockMode::kRead);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  EXPECT_EQ(f.wait_for(20ms), std::future_status::timeout);
  locks_.release_and_handover(w);
  EXPECT_EQ(f.get(), LockResult::kGranted);
  EXPECT_EQ(store_.row(0).r_count.load(), 1u);
  EXPECT_EQ(r.state(), TxnState::kRunning);
}

TEST_F(LockManagerTest, WriteOnFreeRowSetsOwner) {
  TxnContext& a = txn(1);
  EXPECT_EQ(lock(a, 3, LockMode::kWrite), LockResult::kGranted);
  EXPECT_EQ(store_.row(3).lock_word.load(), a.tid().order_key());
}

TEST_F(LockManagerTest, WriterWoundsAllLowerRankedReaders) {
  TxnContext& r1 = txn(5);
  TxnContext& r2 = txn(6);
  TxnContext& w = txn(1);
  ASSERT_EQ(lock(r1, 0, LockMode::kRead), LockResult::kGranted);
  ASSERT_EQ(lock(r2, 0, LockMode::kRead), LockResult::kGranted);
  ASSERT_EQ(store_.row(0).r_count.load(), 2u);
  EXPECT_EQ(lock(w, 0, LockMode::kWrite), LockResult::kGranted);
  EXPECT_EQ(store_.row(0).r_count.load(), 0u);
  EXPECT_EQ(r1.state(), TxnState::kAborted);
  EXPECT_EQ(r2.state(), TxnState::kAborted);
}

TEST_F(LockManagerTest, CommittingOwnerIsNotPreempted) {
  TxnContext& low = txn(9, 0);
  TxnContext& high = txn(1, 9);
  ASSERT_EQ(lock(low, 0, LockMode::kWrite), LockResult::kGranted);
  ASSERT_TRUE(low.transition(TxnState::kRunning, TxnState::kValidating));
  ASSERT_TRUE(low.transition(TxnState::kValidating, TxnState::kCommitting));
  store_.set_committing(0, low.tid());
  auto f = lock_async(high, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  EXPECT_EQ(low.state(), TxnState::kCommitting);
  store_.clear_committing(0);
  low.set_idle();
  locks_.release_and_handover(low);
  EXPECT_EQ(f.get(), LockResult::kGranted);
}

TEST_F(LockManagerTest, WriterHandsOverToQueuedWriter) {
  TxnContext& a = txn(1);
  TxnContext& b = txn(2);
  ASSERT_EQ(lock(a, 0, LockMode::kWrite), LockResult::kGranted);
  auto f = lock_async(b, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  locks_.release_and_handover(a);
  EXPECT_EQ(f.get(), LockResult::kGranted);
  EXPECT_EQ(store_.row(0).lock_word.load(), b.tid().order_key());
}

TEST_F(LockManagerTest, HandoverFollowsRankOrder) {
  // Queue by rank: read p=3, write p=2, read p=1. The p=3 read is granted;
  // the p=2 write cannot preempt it, so the p=1 read stays queued behind.
  TxnContext& owner = txn(1, 10);
  TxnContext& r3 = txn(2, 3);
  TxnContext& w2 = txn(3, 2);
  TxnContext& r1 = txn(4, 1);
  ASSERT_EQ(lock(owner, 0, LockMode::kWrite), LockResult::kGranted);
  auto f3 = lock_async(r3, 0, LockMode::kRead);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  auto f2 = lock_async(w2, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 2; }));
  auto f1 = lock_async(r1, 0, LockMode::kRead);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 3; }));

  auto view = locks_.snapshot(0);
  ASSERT_EQ(view.waiters.size(), 3u);
  EXPECT_EQ(view.waiters[0].tid, r3.tid());
  EXPECT_EQ(view.waiters[1].tid, w2.tid());
  EXPECT_EQ(view.waiters[2].tid, r1.tid());

  locks_.release_and_handover(owner);
  EXPECT_EQ(f3.get(), LockResult::kGranted);
  view = locks_.snapshot(0);
  ASSERT_EQ(view.waiters.size(), 2u);
  EXPECT_EQ(view.waiters[0].tid, w2.tid());
  EXPECT_EQ(view.waiters[1].tid, r1.tid());
  EXPECT_EQ(f1.wait_for(20ms), std::future_status::timeout);

  locks_.release_and_handover(r3);
  EXPECT_EQ(f2.get(), LockResult::kGranted);
  locks_.release_and_handover(w2);
  EXPECT_EQ(f1.get(), LockResult::kGranted);
}

TEST_F(LockManagerTest, LastReaderHandsOverToWriter) {
  TxnContext& r1 = txn(1, 5);
  TxnContext& r2 = txn(2, 5);
  TxnContext& w = txn(3, 0);
  ASSERT_EQ(lock(r1, 0, LockMode::kRead), LockResult::kGranted);
  ASSERT_EQ(lock(r2, 0, LockMode::kRead), LockResult::kGranted);
  auto f = lock_async(w, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  locks_.release_and_handover(r1);
  EXPECT_EQ(f.wait_for(20ms), std::future_status::timeout);
  locks_.release_and_handover(r2);
  EXPECT_EQ(f.get(), LockResult::kGranted);
}

TEST_F(LockManagerTest, NewRequestQueuesBehindBetterRankedWaiter) {
  TxnContext& owner = txn(1, 10);
  TxnContext& good = txn(2, 5);
  TxnContext& reader = txn(3, 0);
  ASSERT_EQ(lock(owner, 0, LockMode::kRead), LockResult::kGranted);
  auto fw = lock_async(good, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  // The row is read-shared, yet the reader must not overtake the writer.
  auto fr = lock_async(reader, 0, LockMode::kRead);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 2; }));
  locks_.release_and_handover(owner);
  EXPECT_EQ(fw.get(), LockResult::kGranted);
  locks_.release_and_handover(good);
  EXPECT_EQ(fr.get(), LockResult::kGranted);
}

TEST_F(LockManagerTest, WoundedWaiterLeavesTheQueue) {
  TxnContext& owner = txn(1, 10);
  TxnContext& w = txn(2, 0);
  ASSERT_EQ(lock(owner, 0, LockMode::kWrite), LockResult::kGranted);
  auto f = lock_async(w, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  w.wound(w.attempt(), rt_);
  EXPECT_EQ(f.get(), LockResult::kAborted);
  EXPECT_EQ(waiters(0), 0u);
  EXPECT_EQ(locks_.waiting_count(), 0u);
}

TEST_F(LockManagerTest, TimeoutAbortsTheWaiter) {
  LockManagerOptions opts;
  opts.wait_timeout = 50ms;
  LockManager lm(store_, rt_, opts);
  TxnContext& owner = txn(1, 10);
  TxnContext& w = txn(2, 0);
  owner.lock_keys.push_back(0);
  ASSERT_EQ(lm.wlock(0, owner), LockResult::kGranted);
  w.lock_keys.push_back(0);
  EXPECT_EQ(lm.wlock(0, w), LockResult::kAborted);
  EXPECT_EQ(w.abort_reason, AbortReason::kLockTimeout);
  EXPECT_EQ(lm.timeouts(), 1u);
}

TEST_F(LockManagerTest, BoostedWaiterWoundsTheHolder) {
  TxnContext& holder = txn(1, 0);
  TxnContext& w = txn(2, 0);
  ASSERT_EQ(lock(holder, 0, LockMode::kWrite), LockResult::kGranted);
  auto f = lock_async(w, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  w.raise_priority(Priority{4});
  locks_.reevaluate_pending(w);
  EXPECT_EQ(f.get(), LockResult::kGranted);
  EXPECT_EQ(holder.state(), TxnState::kAborted);
}

TEST_F(LockManagerTest, BoostAgainstCommittingHolderStillWaits) {
  TxnContext& holder = txn(1, 0);
  TxnContext& w = txn(2, 0);
  ASSERT_EQ(lock(holder, 0, LockMode::kWrite), LockResult::kGranted);
  ASSERT_TRUE(holder.transition(TxnState::kRunning, TxnState::kValidating));
  ASSERT_TRUE(holder.transition(TxnState::kValidating, TxnState::kCommitting));
  store_.set_committing(0, holder.tid());
  auto f = lock_async(w, 0, LockMode::kWrite);
  ASSERT_TRUE(eventually([&] { return waiters(0) == 1; }));
  w.raise_priority(Priority{9});
  locks_.reevaluate_pending(w);
  EXPECT_EQ(f.wait_for(30ms), std::future_status::timeout);
  EXPECT_EQ(holder.state(), TxnState::kCommitting);
  store_.clear_committing(0);
  holder.set_idle();
  locks_.release_and_handover(holder);
  EXPECT_EQ(f.get(), LockResult::kGranted);
}

TEST_F(LockManagerTest, BoostWithoutPendingRequestIsNoOp) {
  TxnContext& a = txn(1);
  locks_.reevaluate_pending(a);
  EXPECT_EQ(locks_.reevaluate_calls(), 1u);
  EXPECT_EQ(a.state(), TxnState::kRunning);
}

TEST_F(LockManagerTest, ReleaseSkipsRowsTakenByWounder) {
  TxnContext& low = txn(5, 0);
  TxnContext& high = txn(1, 3);
  ASSERT_EQ(lock(low, 0, LockMode::kWrite), LockResult::kGranted);
  ASSERT_EQ(lock(high, 0, LockMode::kWrite), LockResult::kGranted);
  locks_.release_and_handover(low);
  EXPECT_EQ(store_.row(0).lock_word.load(), high.tid().order_key());
}

// Wait-for edges only point from a waiter to a better-ranked holder or queued
// request, so with fixed priorities no cycle can form. Checked here on a
// random schedule of blocking requests with a wait-for graph built from
// lock snapshots.
TEST_F(LockManagerTest, WaitForEdgesPointUpInRank) {
  Rng rng(3);
  std::vector<TxnContext*> txns;
  for (int i = 0; i < 6; ++i) txns.push_back(&txn(static_cast<std::uint64_t>(i + 1), uniform_int(rng, 0, 2)));
  std::vector<std::future<LockResult>> pending;
  for (int i = 0; i < 6; ++i) {
    Key k = uniform_int(rng, 0, 2);
    pending.push_back(lock_async(*txns[i], k, bernoulli(rng, 0.5) ? LockMode::kWrite : LockMode::kRead));
    std::this_thread::sleep_for(5ms);
  }
  for (Key k = 0; k < 3; ++k) {
    auto v = locks_.snapshot(k);
    for (std::size_t i = 0; i < v.waiters.size(); ++i) {
      for (const auto& h : v.holders) {
        if (h.tid.same_txn(v.waiters[i].tid)) continue;
        EXPECT_FALSE(outranks(v.waiters[i].rank, h.rank) && h.mode == LockMode::kWrite && !v.committing)
            << "waiter outranks a preemptible writer it waits for";
      }
      if (i > 0) EXPECT_TRUE(compare(v.waiters[i - 1].rank, v.waiters[i].rank) >= 0);
    }
  }
  for (auto* t : txns) t->wound(t->attempt(), rt_);
  for (auto& f : pending) f.wait();
  for (auto* t : txns) locks_.release_and_handover(*t);
  EXPECT_EQ(locks_.waiting_count(), 0u);
}

}  // namespace
}  // namespace atcc
