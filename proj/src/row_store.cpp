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

#include "atcc/row_store.hpp"

#include <algorithm>
#include <cstring>

#include "atcc/error.hpp"

namespace atcc {

RowStore::RowStore(std::size_t num_rows, std::size_t payload_capacity)
    : num_rows_(num_rows),
      capacity_(payload_capacity),
      words_(1 + (payload_capacity + 7) / 8),
      rows_(std::make_unique<Row[]>(num_rows)),
      payload_(std::make_unique<std::atomic<std::uint64_t>[]>(num_rows * words_)) {}

RowStore::~RowStore() = default;

void RowStore::check_key(Key key) const {
  if (key >= num_rows_) throw NotFoundError("key " + std::to_string(key) + " not in table");
}

Row& RowStore::row(Key key) {
  check_key(key);
  return rows_[key];
}

const Row& RowStore::row(Key key) const {
  check_key(key);
  return rows_[key];
}

void RowStore::store_payload(Key key, std::string_view payload) {
  if (payload.size() > capacity_) {
    throw InvariantViolation("payload of " + std::to_string(payload.size()) +
                             " bytes exceeds row capacity " + std::to_string(capacity_));
  }
  std::atomic<std::uint64_t>* w = words(key);
  w[0].store(payload.size(), std::memory_order_relaxed);
  for (std::size_t i = 0, off = 0; off < payload.size(); ++i, off += 8) {
    std::uint64_t chunk = 0;
    std::memcpy(&chunk, payload.data() + off, std::min<std::size_t>(8, payload.size() - off));
    w[1 + i].store(chunk, std::memory_order_relaxed);
  }
}

void RowStore::load(Key key, std::string_view payload) {
  check_key(key);
  store_payload(key, payload);
}

RowSnapshot RowStore::read_latest_committed(Key key, Runtime& rt) const {
  const Row& r = row(key);
  const std::atomic<std::uint64_t>* w = words(key);
  RowSnapshot out;
  std::uint64_t buf[64];
  std::vector<std::uint64_t> big;
  std::uint64_t* dst = buf;
  if (words_ - 1 > std::size(buf)) {
    big.resize(words_ - 1);
    dst = big.data();
  }
  for (;;) {
    Version v1 = r.version.load(std::memory_order_acquire);
    if ((r.lock_word.load(std::memory_order_acquire) & Row::kCommittingBit) != 0) {
      rt.relax();
      continue;
    }
    std::size_t len = std::min<std::size_t>(w[0].load(std::memory_order_relaxed), capacity_);
    std::size_t n = (len + 7) / 8;
    for (std::size_t i = 0; i < n; ++i) dst[i] = w[1 + i].load(std::memory_order_relaxed);
    std::atomic_thread_fence(std::memory_order_acquire);
    bool busy = (r.lock_word.load(std::memory_order_relaxed) & Row::kCommittingBit) != 0;
    Version v2 = r.version.load(std::memory_order_relaxed);
    if (busy || v1 != v2) {
      rt.relax();
      continue;
    }
    out.payload.assign(reinterpret_cast<const char*>(dst), len);
    out.version = v1;
    return out;
  }
}

Version RowStore::current_version(Key key) const { return row(key).version.load(std::memory_order_acquire); }

void RowStore::install_version(Key key, std::string_view payload, Version csn) {
  Row& r = row(key);
  if (!r.committing()) {
    throw InvariantViolation("install_version on key " + std::to_string(key) + " without committing latch");
  }
  Version cur = r.version.load(std::memory_order_relaxed);
  if (csn <= cur) {
    throw InvariantViolation("csn " + std::to_string(csn) + " does not advance version " +
                             std::to_string(cur) + " of key " + std::to_string(key));
  }
  std::atomic_thread_fence(std::memory_order_release);
  store_payload(key, payload);
  r.version.store(csn, std::memory_order_release);
}

void RowStore::set_committing(Key key, TransactionId owner) {
  Row& r = row(key);
  std::uint64_t expected = owner.order_key();
  if (!r.lock_word.compare_exchange_strong(expected, expected | Row::kCommittingBit,
                                           std::memory_order_acq_rel)) {
    throw InvariantViolation("set_committing on key " + std::to_string(key) + " by non-owner " +
                             owner.to_string());
  }
}

void RowStore::clear_committing(Key key) {
  row(key).lock_word.fetch_and(~Row::kCommittingBit, std::memory_order_release);
}

void RowStore::note_access(Key key, bool is_write) {
  Row& r = row(key);
  r.epoch_access.fetch_add(1, std::memory_order_relaxed);
  if (is_write) r.epoch_writes.fetch_add(1, std::memory_order_relaxed);
}

std::vector<Key> RowStore::update_hot_flags(double threshold_fraction, std::uint32_t min_accesses) {
  std::vector<std::pair<std::uint32_t, Key>> accessed;
  for (Key k = 0; k < num_rows_; ++k) {
    std::uint32_t n = rows_[k].epoch_access.exchange(0, std::memory_order_relaxed);
    rows_[k].epoch_writes.store(0, std::memory_order_relaxed);
    if (n >= min_accesses) accessed.emplace_back(n, k);
  }
  epoch_.fetch_add(1, std::memory_order_relaxed);
  std::vector<Key> flipped;
  if (accessed.empty()) return flipped;

  auto take = static_cast<std::size_t>(threshold_fraction * static_cast<double>(accessed.size()) + 0.5);
  take = std::min(take, accessed.size());
  // Most accessed first, lower key on ties.
  auto by_rank = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
  std::nth_element(accessed.begin(), accessed.begin() + static_cast<std::ptrdiff_t>(take), accessed.end(), by_rank);
  std::vector<char> want(num_rows_, 0);
  for (std::size_t i = 0; i < take; ++i) want[accessed[i].second] = 1;

  std::size_t hot = 0;
  for (Key k = 0; k < num_rows_; ++k) {
    bool now_hot = want[k] != 0;
    if (rows_[k].hot.exchange(now_hot, std::memory_order_relaxed) != now_hot) flipped.push_back(k);
    hot += now_hot ? 1 : 0;
  }
  hot_count_.store(hot, std::memory_order_relaxed);
  return flipped;
}

void RowStore::reset_versions() {
  for (Key k = 0; k < num_rows_; ++k) {
    if (rows_[k].lock_word.load(std::memory_order_acquire) != Row::kFree) {
      throw InvariantViolation("reset_versions while key " + std::to_string(k) + " is locked");
    }
    rows_[k].version.store(0, std::memory_order_release);
  }
}

void RowStore::reset_hot_flags() {
  for (Key k = 0; k < num_rows_; ++k) {
    rows_[k].epoch_access.store(0, std::memory_order_relaxed);
    rows_[k].epoch_writes.store(0, std::memory_order_relaxed);
    rows_[k].hot.store(false, std::memory_order_relaxed);
  }
  hot_count_.store(0, std::memory_order_relaxed);
}

}  // namespace atcc
