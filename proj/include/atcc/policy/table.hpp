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
#include <vector>

#include "atcc/action.hpp"
#include "atcc/policy/features.hpp"

namespace atcc {

// Dense state -> action-set table. Every state starts at RemainOCC, so the
// table is total over the key space of its bucket spec.
class PolicyTable {
 public:
  explicit PolicyTable(BucketSpec spec = BucketSpec::defaults());

  const BucketSpec& spec() const { return spec_; }
  std::size_t state_count() const { return entries_.size(); }

  ActionSet lookup(const StateKey& key) const {
    return key.index < entries_.size() ? ActionSet(entries_[key.index]) : kRemainOcc;
  }
  ActionSet at(std::uint32_t index) const { return ActionSet(entries_.at(index)); }
  void set(const StateKey& key, ActionSet a) { set(key.index, a); }
  void set(std::uint32_t index, ActionSet a);

  // Number of states mapped to something other than RemainOCC.
  std::size_t non_default() const;

  bool operator==(const PolicyTable& o) const { return spec_ == o.spec_ && entries_ == o.entries_; }

  // Versioned binary encoding: header, bucket spec, sparse entries.
  std::string serialize() const;
  // Throws LoadError on bad magic, unknown version, or a bucket spec that
  // differs from `expected`.
  static PolicyTable deserialize(const std::string& bytes, const BucketSpec& expected);

 private:
  BucketSpec spec_;
  std::vector<std::uint8_t> entries_;
};

// Hot-path lookup. Pure: no allocation, no locking, no blocking.
ActionSet decide(const PolicyTable& table, const StateKey& key);

// Hand-written policy: `action` in every state that follows a pause between
// operations (interval bucket above 0) or belongs to a retried attempt
// (retry bucket above 0), RemainOCC everywhere else.
PolicyTable pause_or_retry_rule(const BucketSpec& spec, ActionSet action);

// Throws IoError on file errors.
void export_table(const PolicyTable& table, const std::string& path);
// Throws IoError or LoadError.
PolicyTable load_table(const std::string& path, const BucketSpec& expected = BucketSpec::defaults());

// Debug aid for "decide() never runs on a blocking path". Code that may block
// marks its extent with a BlockingRegion; decide() counts calls made inside
// one.
class BlockingRegion {
 public:
  BlockingRegion();
  ~BlockingRegion();
  BlockingRegion(const BlockingRegion&) = delete;
  BlockingRegion& operator=(const BlockingRegion&) = delete;

  static bool active();
  static std::uint64_t decide_violations();
  static void reset_violations();
};

}  // namespace atcc
