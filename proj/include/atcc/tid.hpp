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

#include <compare>
#include <cstdint>
#include <string>

namespace atcc {

using WorkerId = std::uint16_t;

enum class TxnStatus : std::uint8_t { kRunning = 0, kAborted = 1 };

// 64-bit transaction identity: [status:1 | startTS:47 | wid:16], most to least
// significant. With the status bit masked off, a smaller raw value means an
// older transaction (startTS dominates, wid breaks ties).
class TransactionId {
 public:
  static constexpr int kWidBits = 16;
  static constexpr int kStartTsBits = 47;
  static constexpr std::uint64_t kWidMask = (std::uint64_t{1} << kWidBits) - 1;
  static constexpr std::uint64_t kStartTsLimit = std::uint64_t{1} << kStartTsBits;
  static constexpr std::uint64_t kStatusBit = std::uint64_t{1} << 63;

  constexpr TransactionId() = default;

  // Throws LayoutError if wid >= 2^16 or start_ts >= 2^47.
  static TransactionId pack(std::uint64_t wid, std::uint64_t start_ts, TxnStatus status);

  static constexpr TransactionId from_raw(std::uint64_t raw) {
    TransactionId t;
    t.raw_ = raw;
    return t;
  }

  constexpr std::uint64_t raw() const { return raw_; }
  constexpr WorkerId wid() const { return static_cast<WorkerId>(raw_ & kWidMask); }
  constexpr std::uint64_t start_ts() const { return (raw_ >> kWidBits) & (kStartTsLimit - 1); }
  constexpr TxnStatus status() const {
    return (raw_ & kStatusBit) != 0 ? TxnStatus::kAborted : TxnStatus::kRunning;
  }

  // Identity used for ordering and ownership; ignores the status bit.
  constexpr std::uint64_t order_key() const { return raw_ & ~kStatusBit; }

  constexpr TransactionId with_status(TxnStatus s) const {
    return from_raw(s == TxnStatus::kAborted ? (raw_ | kStatusBit) : (raw_ & ~kStatusBit));
  }

  // Same transaction regardless of status.
  constexpr bool same_txn(TransactionId other) const { return order_key() == other.order_key(); }

  constexpr bool operator==(const TransactionId&) const = default;

  std::string to_string() const;

 private:
  std::uint64_t raw_ = 0;
};

// Reserved "no owner" value. The engine never issues wid 0xFFFF, so this
// pattern cannot collide with a live transaction.
inline constexpr TransactionId kInvalidTid = TransactionId::from_raw(~TransactionId::kStatusBit);

}  // namespace atcc
