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

#include <cstdint>
#include <string>
#include <string_view>

namespace atcc {

enum class Action : std::uint8_t {
  kLockHotRead = 1,
  kLockHotWrite = 2,
  kLockFullRead = 4,
  kLockFullWrite = 8,
  kPrioritize = 16,
};

// A set of actions. The empty set is RemainOCC. Full scopes include the hot
// subset, so FullRead locks every read and HotRead only reads of hot rows.
class ActionSet {
 public:
  static constexpr std::uint8_t kAllBits = 31;

  constexpr ActionSet() = default;
  constexpr explicit ActionSet(std::uint8_t bits) : bits_(bits & kAllBits) {}
  constexpr ActionSet(Action a) : bits_(static_cast<std::uint8_t>(a)) {}  // NOLINT(implicit)

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool has(Action a) const { return (bits_ & static_cast<std::uint8_t>(a)) != 0; }

  constexpr ActionSet operator|(ActionSet o) const { return ActionSet(static_cast<std::uint8_t>(bits_ | o.bits_)); }
  constexpr bool operator==(const ActionSet&) const = default;

  // True when every scope of `o` is already covered by this set.
  constexpr bool covers(ActionSet o) const { return (o | *this) == *this; }

  constexpr bool locks_read(bool hot) const {
    return has(Action::kLockFullRead) || (hot && has(Action::kLockHotRead));
  }
  constexpr bool locks_write(bool hot) const {
    return has(Action::kLockFullWrite) || (hot && has(Action::kLockHotWrite));
  }
  constexpr bool any_lock_scope() const { return (bits_ & 15) != 0; }

  // "occ", or '+'-joined names such as "hot_write+prioritize".
  std::string to_string() const;
  // Inverse of to_string. Throws ConfigError on unknown names.
  static ActionSet parse(std::string_view text);

 private:
  std::uint8_t bits_ = 0;
};

inline constexpr ActionSet kRemainOcc{};

}  // namespace atcc
