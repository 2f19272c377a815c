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

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "atcc/error.hpp"
#include "atcc/row_store.hpp"
#include "atcc/rng.hpp"
#include "atcc/runtime.hpp"
#include "atcc/workload/zipf.hpp"

namespace atcc {
namespace {

const TransactionId kOwner = TransactionId::pack(1, 1, TxnStatus::kRunning);

// Plays the part of a lock holder that commits one version.
void commit_version(RowStore& s, Key k, std::string_view payload, Version csn) {
  s.row(k).lock_word.store(kOwner.order_key());
  s.set_committing(k, kOwner);
  s.install_version(k, payload, csn);
  s.clear_committing(k);
  s.row(k).lock_word.store(Row::kFree);
}

TEST(RowStoreTest, UncontendedReadReturnsPayloadAndVersion) {
  RealRuntime rt;
  RowStore s(4, 64);
  s.load(2, "seed");
  commit_version(s, 2, "seven", 7);
  RowSnapshot snap = s.read_latest_committed(2, rt);
  EXPECT_EQ(snap.payload, "seven");
  EXPECT_EQ(snap.version, 7u);
  EXPECT_EQ(s.current_version(2), 7u);
}

TEST(RowStoreTest, WriteLockedRowStillShowsLastCommit) {
  RealRuntime rt;
  RowStore s(1, 16);
  s.load(0, "old");
  s.row(0).lock_word.store(kOwner.order_key());
  RowSnapshot snap = s.read_latest_committed(0, rt);
  EXPECT_EQ(snap.payload, "old");
  EXPECT_EQ(snap.version, 0u);
}

TEST(RowStoreTest, InstallAdvancesVersion) {
  RowStore s(1, 16);
  commit_version(s, 0, "a", 1);
  EXPECT_EQ(s.current_version(0), 1u);
  commit_version(s, 0, "b", 2);
  EXPECT_EQ(s.current_version(0), 2u);
}

TEST(RowStoreTest, InstallRequiresCommittingLatch) {
  RowStore s(1, 16);
  EXPECT_THROW(s.install_version(0, "x", 1), InvariantViolation);
}

TEST(RowStoreTest, InstallRejectsNonAdvancingCsn) {
  RowStore s(1, 16);
  commit_version(s, 0, "a", 3);
  s.row(0).lock_word.store(kOwner.order_key());
  s.set_committing(0, kOwner);
  EXPECT_THROW(s.install_version(0, "b", 3), InvariantViolation);
}

TEST(RowStoreTest, CommittingLatchNeedsTheOwner) {
  RowStore s(1, 16);
  EXPECT_THROW(s.set_committing(0, kOwner), InvariantViolation);
}

TEST(RowStoreTest, UnknownKeyAndOversizedPayload) {
  RowStore s(2, 8);
  EXPECT_THROW(s.row(2), NotFoundError);
  EXPECT_FALSE(s.contains(2));
  EXPECT_THROW(s.load(0, std::string(9, 'x')), InvariantViolation);
}

TEST(RowStoreTest, ResetVersionsKeepsPayloads) {
  RealRuntime rt;
  RowStore s(1, 16);
  commit_version(s, 0, "kept", 5);
  s.reset_versions();
  RowSnapshot snap = s.read_latest_committed(0, rt);
  EXPECT_EQ(snap.version, 0u);
  EXPECT_EQ(snap.payload, "kept");
}

// Payload whose last 8 characters are a checksum of the rest.
std::string checksummed(std::uint64_t n) {
  std::string body = std::to_string(n * 2654435761u) + ":" + std::string(n % 40, 'a' + n % 26);
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : body) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  char tail[9];
  std::snprintf(tail, sizeof tail, "%08x", static_cast<unsigned>(h & 0xffffffff));
  return body + tail;
}

bool checksum_ok(const std::string& p) {
  if (p.size() < 8) return false;
  std::string body = p.substr(0, p.size() - 8);
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : body) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  char tail[9];
  std::snprintf(tail, sizeof tail, "%08x", static_cast<unsigned>(h & 0xffffffff));
  return p.compare(p.size() - 8, 8, tail) == 0;
}

TEST(RowStoreTest, RacingReadsNeverSeeTornPayloads) {
  RealRuntime rt;
  RowStore s(1, 128);
  s.load(0, checksummed(0));
  std::atomic<bool> stop{false};
  std::thread writer([&] {
    Version v = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      ++v;
      commit_version(s, 0, checksummed(v), v);
    }
  });
  std::uint64_t failures = 0;
  Version last = 0;
  bool monotone = true;
  for (int i = 0; i < 1'000'000; ++i) {
    RowSnapshot snap = s.read_latest_committed(0, rt);
    if (!checksum_ok(snap.payload) || snap.payload != checksummed(snap.version)) ++failures;
    if (snap.version < last) monotone = false;
    last = snap.version;
  }
  stop = true;
  writer.join();
  EXPECT_EQ(failures, 0u);
  EXPECT_TRUE(monotone);
}

TEST(HotFlagsTest, UniformAccessFlagsTheRequestedFraction) {
  RowStore s(1000, 8);
  for (Key k = 0; k < 1000; ++k)
    for (int i = 0; i < 3; ++i) s.note_access(k, false);
  auto flipped = s.update_hot_flags(0.1);
  EXPECT_EQ(flipped.size(), 100u);
  EXPECT_EQ(s.hot_count(), 100u);
}

// Ten accessed keys where `top` is the busiest, so a 10% threshold flags
// exactly that key.
void epoch_with_top(RowStore& s, Key top) {
  for (Key k = 0; k < 10; ++k)
    for (int i = 0; i < 3; ++i) s.note_access(k, false);
  for (int i = 0; i < 5; ++i) s.note_access(top, true);
}

TEST(HotFlagsTest, EmptyEpochChangesNothing) {
  RowStore s(10, 8);
  epoch_with_top(s, 3);
  EXPECT_EQ(s.update_hot_flags(0.1), std::vector<Key>{3});
  ASSERT_TRUE(s.row(3).hot.load());
  auto flipped = s.update_hot_flags(0.1);
  EXPECT_TRUE(flipped.empty());
  EXPECT_TRUE(s.row(3).hot.load());
}

TEST(HotFlagsTest, KeysBelowTheMinimumDoNotQualify) {
  RowStore s(10, 8);
  s.note_access(4, false);
  EXPECT_TRUE(s.update_hot_flags(1.0).empty());
  s.note_access(4, false);
  s.note_access(4, false);
  EXPECT_EQ(s.update_hot_flags(1.0), std::vector<Key>{4});
}

TEST(HotFlagsTest, ColdKeysLoseTheFlag) {
  RowStore s(10, 8);
  epoch_with_top(s, 3);
  s.update_hot_flags(0.1);
  epoch_with_top(s, 7);
  auto flipped = s.update_hot_flags(0.1);
  EXPECT_EQ(flipped, (std::vector<Key>{3, 7}));
  EXPECT_FALSE(s.row(3).hot.load());
  EXPECT_TRUE(s.row(7).hot.load());
}

TEST(HotFlagsTest, ResetClearsFlags) {
  RowStore s(10, 8);
  epoch_with_top(s, 1);
  s.update_hot_flags(0.1);
  ASSERT_EQ(s.hot_count(), 1u);
  s.reset_hot_flags();
  EXPECT_EQ(s.hot_count(), 0u);
  EXPECT_FALSE(s.row(1).hot.load());
}

// Coverage of the flagged set under Zipf(0.99) traffic, against the exact
// mass of the top 10% of keys: 0.6850 for 1000 keys, 0.7559 for 10000.
double flagged_coverage(std::uint64_t n, std::uint64_t draws) {
  RowStore s(n, 8);
  ZipfDistribution z(n, 0.99);
  Rng rng(11);
  std::vector<std::uint32_t> count(n, 0);
  for (std::uint64_t i = 0; i < draws; ++i) {
    Key k = z(rng);
    ++count[k];
    s.note_access(k, false);
  }
  s.update_hot_flags(0.1, 1);
  std::uint64_t covered = 0;
  for (Key k = 0; k < n; ++k)
    if (s.row(k).hot.load()) covered += count[k];
  return static_cast<double>(covered) / static_cast<double>(draws);
}

TEST(HotFlagsTest, ZipfCoverageMatchesClosedForm) {
  EXPECT_NEAR(flagged_coverage(1000, 1'000'000), 0.6850, 0.005);
  const double big = flagged_coverage(10'000, 2'000'000);
  EXPECT_NEAR(big, 0.7559, 0.01);
  EXPECT_GE(big, 0.70);
}

}  // namespace
}  // namespace atcc
