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

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iterator>
#include <thread>
#include <vector>

#include "atcc/error.hpp"
#include "atcc/policy/decider.hpp"
#include "atcc/policy/features.hpp"
#include "atcc/policy/qlearn.hpp"
#include "atcc/policy/refiner.hpp"
#include "atcc/policy/reward.hpp"
#include "atcc/policy/table.hpp"
#include "atcc/rng.hpp"
#include "atcc/txn_context.hpp"
#include "eq_tables.hpp"

namespace atcc {
namespace {

using testing_support::kRewardCases;

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("atcc_policy_test_" + name)).string();
}

TEST(FeaturesTest, OverlapIsJaccard) {
  using Set = std::unordered_set<Key>;
  EXPECT_DOUBLE_EQ(jaccard(Set{1, 2, 3}, Set{1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(Set{1, 2}, Set{3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(Set{1, 2, 3}, Set{2, 3, 4}), 0.5);
  EXPECT_DOUBLE_EQ(jaccard(Set{}, Set{}), 0.0);
}

TEST(FeaturesTest, ExtractUsesRoundsAndDeltas) {
  TxnStats s;
  s.sql_count = 4;
  s.hot_accesses = 3;
  s.consecutive_writes = 2;
  s.retry_count = 1;
  s.blocked_ms = 12.5;
  s.last_op_end = Nanos(1'000'000);
  s.prev_round_keys = {1, 2, 3};
  s.round_keys = {2, 3, 4};
  s.rs_at_round_start = 1;
  s.ws_at_round_start = 2;
  GlobalMetrics g{0.1, 500, 3, 9, 2};
  FeatureVector fv = extract_features(s, 4, 2, Nanos(8'000'000), g);
  EXPECT_DOUBLE_EQ(fv.interval_ms, 7.0);
  EXPECT_DOUBLE_EQ(fv.rs_delta, 3.0);
  EXPECT_DOUBLE_EQ(fv.ws_delta, 0.0);
  EXPECT_DOUBLE_EQ(fv.overlap_ratio, 0.5);
  EXPECT_DOUBLE_EQ(fv.consecutive_writes, 2.0);
  EXPECT_DOUBLE_EQ(fv.hot_access_ratio, 0.75);
  EXPECT_DOUBLE_EQ(fv.blocked_ms, 12.5);
  EXPECT_DOUBLE_EQ(fv.retry_count, 1.0);
  EXPECT_DOUBLE_EQ(fv.global.lock_queue_len, 2.0);

  close_round(s, 4, 2);
  EXPECT_EQ(s.prev_round_keys, (std::unordered_set<Key>{2, 3, 4}));
  EXPECT_TRUE(s.round_keys.empty());
  EXPECT_EQ(s.rs_at_round_start, 4u);
}

TEST(FeaturesTest, NoIntervalBeforeFirstOperation) {
  TxnStats s;
  FeatureVector fv = extract_features(s, 0, 0, Nanos(50'000'000), {});
  EXPECT_DOUBLE_EQ(fv.interval_ms, 0.0);
}

TEST(DiscretizeTest, AllZeroFeaturesGiveZeroKey) {
  StateKey k = discretize(FeatureVector{}, BucketSpec::defaults());
  EXPECT_EQ(k.index, 0u);
  for (auto b : k.bucket) EXPECT_EQ(b, 0);
}

TEST(DiscretizeTest, ValuesPastTheTopClampToLastBucket) {
  FeatureVector fv;
  fv.interval_ms = 1e9;
  StateKey k = discretize(fv, BucketSpec::defaults());
  EXPECT_EQ(k.bucket[0], 3);
}

TEST(DiscretizeTest, BoundaryBelongsToUpperBucket) {
  FeatureVector fv;
  fv.interval_ms = 50;
  EXPECT_EQ(discretize(fv, BucketSpec::defaults()).bucket[0], 1);
  fv.interval_ms = 49.999;
  EXPECT_EQ(discretize(fv, BucketSpec::defaults()).bucket[0], 0);
}

TEST(DiscretizeTest, SameBucketsSameKey) {
  FeatureVector a, b;
  a.interval_ms = 60;
  b.interval_ms = 400;
  a.retry_count = 2;
  b.retry_count = 7;
  EXPECT_EQ(discretize(a, BucketSpec::defaults()).index, discretize(b, BucketSpec::defaults()).index);
}

TEST(DiscretizeTest, IndexRoundTrips) {
  const BucketSpec spec = BucketSpec::defaults();
  EXPECT_EQ(spec.state_count(), 78'732u);  // 4 * 3^9
  for (std::uint32_t i : {0u, 1u, 4242u, 78'731u}) {
    StateKey k = key_from_index(i, spec);
    FeatureVector fv;
    double* fields[] = {&fv.interval_ms, &fv.rs_delta, &fv.ws_delta, &fv.overlap_ratio, &fv.consecutive_writes,
                        &fv.hot_access_ratio, &fv.blocked_ms, &fv.retry_count, &fv.global.abort_rate,
                        &fv.global.lock_queue_len};
    for (std::size_t f = 0; f < kNumFeatures; ++f) *fields[f] = k.bucket[f] == 0 ? 0.0 : spec.bounds[f][k.bucket[f] - 1];
    EXPECT_EQ(discretize(fv, spec).index, i);
  }
}

TEST(BucketSpecTest, RejectsUnsortedBounds) {
  BucketSpec s = BucketSpec::defaults();
  s.bounds[2] = {4, 1};
  EXPECT_THROW(s.validate(), ConfigError);
  s.bounds[2] = {1, 1};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(DecideTest, EmptyTableRemainsOptimistic) {
  PolicyTable t;
  EXPECT_EQ(t.non_default(), 0u);
  EXPECT_EQ(decide(t, key_from_index(1234, t.spec())), kRemainOcc);
}

TEST(DecideTest, MappedEntryIsReturned) {
  PolicyTable t;
  StateKey k = key_from_index(777, t.spec());
  const ActionSet want = ActionSet(Action::kLockHotWrite) | Action::kPrioritize;
  t.set(k, want);
  EXPECT_EQ(decide(t, k), want);
  EXPECT_EQ(decide(t, key_from_index(778, t.spec())), kRemainOcc);
}

TEST(DecideTest, CountsCallsInsideBlockingRegions) {
  PolicyTable t;
  BlockingRegion::reset_violations();
  decide(t, StateKey{});
  EXPECT_EQ(BlockingRegion::decide_violations(), 0u);
  {
    BlockingRegion r;
    EXPECT_TRUE(BlockingRegion::active());
    decide(t, StateKey{});
  }
  EXPECT_FALSE(BlockingRegion::active());
  EXPECT_EQ(BlockingRegion::decide_violations(), 1u);
  BlockingRegion::reset_violations();
}

TEST(DecideTest, LookupLatencyMedianBelowOneMicrosecond) {
  PolicyTable t;
  for (std::uint32_t i = 0; i < t.state_count(); i += 7) t.set(i, ActionSet(Action::kLockFullRead));
  Rng rng(1);
  std::vector<StateKey> keys;
  for (int i = 0; i < 4096; ++i) keys.push_back(key_from_index(static_cast<std::uint32_t>(uniform_int(rng, 0, t.state_count() - 1)), t.spec()));
  // Batches of 100 lookups amortize the clock read.
  std::vector<double> per_call_ns;
  std::uint64_t sink = 0;
  for (int batch = 0; batch < 10'000; ++batch) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 100; ++i) sink += decide(t, keys[(batch * 100 + i) & 4095]).bits();
    auto t1 = std::chrono::steady_clock::now();
    per_call_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() / 100);
  }
  std::nth_element(per_call_ns.begin(), per_call_ns.begin() + per_call_ns.size() / 2, per_call_ns.end());
  EXPECT_LT(per_call_ns[per_call_ns.size() / 2], 1000.0) << sink;
}

TEST(RewardTest, SubstitutionTable) {
  ASSERT_GE(std::size(kRewardCases), 20u);
  for (const auto& c : kRewardCases) {
    RewardCoeffs k{c.b1, c.b2, c.a1, c.a2, c.a3, c.a_sql, c.a_interval, c.ds, c.di};
    double got = compute_reward(c.commit ? Outcome::kCommit : Outcome::kAbort, RewardDeltas{c.lat, c.tps, c.abort},
                                c.sql, c.interval, k);
    EXPECT_DOUBLE_EQ(got, c.expected) << "lat=" << c.lat << " tps=" << c.tps << " sql=" << c.sql;
  }
}

TEST(RewardTest, CommitAbortGapIsB1PlusB2) {
  RewardCoeffs k;
  RewardDeltas d{2.5, -40, 0.2};
  double gap = compute_reward(Outcome::kCommit, d, 6, 300, k) - compute_reward(Outcome::kAbort, d, 6, 300, k);
  EXPECT_DOUBLE_EQ(gap, k.b1 + k.b2);
}

TEST(RewardTest, DecisionRewardUsesMetricDeltas) {
  DecisionRecord d;
  d.metrics = GlobalMetrics{0.1, 100, 5, 20, 0};
  d.sql_count = 3;
  d.interval_ms = 250;
  GlobalMetrics end{0.2, 300, 6, 20, 0};
  RewardCoeffs k;
  const double expected = compute_reward(Outcome::kCommit, RewardDeltas{1, 200, 0.1}, 3, 250, k);
  EXPECT_DOUBLE_EQ(decision_reward(d, Outcome::kCommit, end, k), expected);
}

TEST(PolicyTableTest, ExportLoadRoundTrip) {
  PolicyTable t;
  t.set(5, ActionSet(Action::kLockHotRead));
  t.set(78'000, ActionSet(Action::kLockFullWrite) | Action::kPrioritize);
  const std::string path = temp_path("roundtrip.tbl");
  export_table(t, path);
  EXPECT_EQ(load_table(path), t);
  std::filesystem::remove(path);
}

TEST(PolicyTableTest, EmptyTableRoundTrip) {
  const std::string path = temp_path("empty.tbl");
  export_table(PolicyTable{}, path);
  PolicyTable back = load_table(path);
  EXPECT_EQ(back.non_default(), 0u);
  EXPECT_EQ(back, PolicyTable{});
  std::filesystem::remove(path);
}

TEST(PolicyTableTest, MismatchedBucketSpecIsRejected) {
  BucketSpec other = BucketSpec::defaults();
  other.bounds[0] = {1, 50, 500, 2000};
  const std::string path = temp_path("mismatch.tbl");
  export_table(PolicyTable(other), path);
  EXPECT_THROW(load_table(path), LoadError);
  EXPECT_NO_THROW(load_table(path, other));
  std::filesystem::remove(path);
}

TEST(PolicyTableTest, CorruptInputIsRejected) {
  std::string bytes = PolicyTable{}.serialize();
  EXPECT_THROW(PolicyTable::deserialize("garbage", BucketSpec::defaults()), LoadError);
  EXPECT_THROW(PolicyTable::deserialize(bytes.substr(0, bytes.size() - 1), BucketSpec::defaults()), LoadError);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(PolicyTable::deserialize(bad_version, BucketSpec::defaults()), LoadError);
  EXPECT_THROW(load_table(temp_path("does_not_exist.tbl")), IoError);
}

// Two decision states. In s0, action 0 pays 1.2 and ends; action 1 pays
// nothing and moves to s1. In s1, action 0 pays 1 and action 1 pays 3 with
// probability one half; both end the episode.
class TwoStateMdp final : public EpisodicEnv {
 public:
  std::size_t num_actions() const override { return 2; }
  std::uint32_t reset(Rng&) override { return 0; }
  Step step(std::uint32_t s, std::size_t a, Rng& rng) override {
    if (s == 0) return a == 0 ? Step{0, 1.2, true} : Step{1, 0.0, false};
    if (a == 0) return Step{0, 1.0, true};
    return Step{0, bernoulli(rng, 0.5) ? 3.0 : 0.0, true};
  }
};

// Backward value iteration over the same model written as explicit
// expectations.
std::array<std::size_t, 2> value_iteration_optimum() {
  const double q1[2] = {1.0, 0.5 * 3.0};
  const double v1 = std::max(q1[0], q1[1]);
  const double q0[2] = {1.2, 0.0 + v1};
  return {q0[1] > q0[0] ? 1u : 0u, q1[1] > q1[0] ? 1u : 0u};
}

TEST(TrainerTest, RecoversValueIterationOptimum) {
  TwoStateMdp env;
  QLearnParams p;
  p.episodes = 20'000;
  p.epsilon = 0.1;
  p.seed = 3;
  TrainLog log;
  QTable q = train_episodic(env, p, &log);
  const auto best = value_iteration_optimum();
  EXPECT_EQ(best[0], 1u);
  EXPECT_EQ(best[1], 1u);
  EXPECT_EQ(q.greedy(0), best[0]);
  EXPECT_EQ(q.greedy(1), best[1]);
  EXPECT_EQ(log.episodes, 20'000u);
  PolicyTable t = greedy_table(q, BucketSpec::defaults());
  EXPECT_EQ(t.at(0), action_lattice()[best[0]]);
}

TEST(TrainerTest, ZeroEpisodesGiveDefaultTable) {
  TwoStateMdp env;
  QLearnParams p;
  p.episodes = 0;
  QTable q = train_episodic(env, p);
  EXPECT_EQ(q.states_seen(), 0u);
  EXPECT_EQ(greedy_table(q, BucketSpec::defaults()).non_default(), 0u);
}

TEST(TrainerTest, SameSeedSameTableBytes) {
  TwoStateMdp env;
  QLearnParams p;
  p.episodes = 500;
  p.seed = 9;
  auto a = greedy_table(train_episodic(env, p), BucketSpec::defaults()).serialize();
  auto b = greedy_table(train_episodic(env, p), BucketSpec::defaults()).serialize();
  EXPECT_EQ(a, b);
}

TEST(TrainerTest, ConservativeExportKeepsNearTies) {
  QTable q(kLatticeSize);
  q.update(0, 0, 1.00);
  q.update(0, 4, 1.02);
  q.update(1, 0, -4.0);
  for (int i = 0; i < 5; ++i) q.update(1, 4, 1.0);
  q.update(2, 3, 0.5);  // RemainOCC never tried here
  PolicyTable plain = greedy_table(q, BucketSpec::defaults());
  EXPECT_EQ(plain.at(0), action_lattice()[4]);
  PolicyTable careful = greedy_table(q, BucketSpec::defaults(), GreedyOptions{0.05, 5});
  EXPECT_EQ(careful.at(0), kRemainOcc);
  EXPECT_EQ(careful.at(1), action_lattice()[4]);
  EXPECT_EQ(careful.at(2), action_lattice()[3]);
}

TEST(LatticeTest, StartsWithRemainOccAndPairsPrioritizeWithLocks) {
  const auto& l = action_lattice();
  EXPECT_EQ(l[0], kRemainOcc);
  for (std::size_t i = 1; i < l.size(); ++i) {
    EXPECT_TRUE(l[i].any_lock_scope()) << l[i].to_string();
    for (std::size_t j = 0; j < i; ++j) EXPECT_NE(l[i], l[j]);
  }
}

class RefinerTest : public ::testing::Test {
 protected:
  static constexpr std::uint32_t kState = 42;
  std::shared_ptr<const PolicyTable> base_ = std::make_shared<const PolicyTable>();
};

TEST_F(RefinerTest, DisabledRefinementMatchesLookup) {
  auto table = std::make_shared<PolicyTable>();
  table->set(kState, ActionSet(Action::kLockHotRead));
  TableDecider plain(table);
  TxnContext ctx(0);
  ctx.start_attempt(TransactionId::pack(0, 1, TxnStatus::kRunning), Priority{});
  for (std::uint32_t s : {0u, kState, 99u}) {
    StateKey k = key_from_index(s, table->spec());
    EXPECT_EQ(plain.decide(ctx, k), decide(*table, k));
  }
}

TEST_F(RefinerTest, OverflowDropsWithoutBlocking) {
  RefinerOptions o;
  o.queue_capacity = 4;
  Refiner r(base_, o);
  int accepted = 0;
  for (int i = 0; i < 10; ++i) accepted += r.submit(RefineReport{0, 1, kState, kRemainOcc, false, 0}) ? 1 : 0;
  EXPECT_LE(accepted, 4);
  EXPECT_EQ(r.dropped(), static_cast<std::uint64_t>(10 - accepted));
}

TEST_F(RefinerTest, ShadowFollowsBetterRewards) {
  RefinerOptions o;
  o.min_samples = 3;
  o.publish_every = 1;
  Refiner r(base_, o);
  const ActionSet lock = action_lattice()[4];
  for (int i = 0; i < 3; ++i) r.submit(RefineReport{0, 1, kState, kRemainOcc, true, -5});
  for (int i = 0; i < 3; ++i) r.submit(RefineReport{0, 1, kState, lock, true, 1});
  r.drain();
  EXPECT_EQ(r.shadow()->at(kState), lock);
  EXPECT_GE(r.shadow_version(), 1u);
  EXPECT_EQ(base_->at(kState), kRemainOcc);
}

TEST_F(RefinerTest, CorrectionForFinishedAttemptIsDiscarded) {
  RefinerOptions o;
  o.min_samples = 1;
  Refiner r(base_, o);
  const ActionSet lock = action_lattice()[4];
  r.submit(RefineReport{0, 1, kState, lock, true, 2});
  r.submit(RefineReport{2, 7, kState, kRemainOcc, false, 0});
  r.drain();
  EXPECT_EQ(r.corrections_posted(), 1u);
  EXPECT_FALSE(r.take_correction(2, 8).has_value());  // attempt 7 already ended
  EXPECT_EQ(r.stale_discarded(), 1u);

  r.submit(RefineReport{2, 9, kState, kRemainOcc, false, 0});
  r.drain();
  auto c = r.take_correction(2, 9);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(*c, lock);
  EXPECT_FALSE(r.take_correction(2, 9).has_value());
}

TEST_F(RefinerTest, BackgroundThreadProcessesReports) {
  Refiner r(base_);
  r.start();
  for (int i = 0; i < 100; ++i) r.submit(RefineReport{0, 1, kState, kRemainOcc, true, 1});
  for (int i = 0; i < 500 && r.processed() < 100; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  r.stop();
  EXPECT_EQ(r.processed(), 100u);
}

}  // namespace
}  // namespace atcc
