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
#include <iosfwd>
#include <mutex>
#include <vector>

#include "atcc/row_store.hpp"
#include "atcc/tid.hpp"

namespace atcc {

enum class EventType : std::uint8_t { kBegin, kRead, kWrite, kCommit, kAbort };

char event_code(EventType t);

// One history record. `txn` is the attempt serial: every attempt of a
// transaction, including retries, gets its own serial.
struct HistoryEvent {
  EventType type = EventType::kBegin;
  std::uint64_t txn = 0;
  TransactionId tid;
  Key key = 0;
  Version version = 0;  // read: version observed; write: version installed
  std::uint64_t csn = 0;
  std::int64_t ts_ns = 0;

  bool operator==(const HistoryEvent&) const = default;
};

// Append-only, globally ordered event log shared by all workers.
class History {
 public:
  void append(const HistoryEvent& e);
  std::vector<HistoryEvent> events() const;
  std::size_t size() const;
  void clear();

  // One record per line: "<code> <txn> <tid> <key> <version> <csn> <ts>".
  static void write_lines(std::ostream& os, const std::vector<HistoryEvent>& events);
  // Throws LoadError on malformed input.
  static std::vector<HistoryEvent> read_lines(std::istream& is);

 private:
  mutable std::mutex mu_;
  std::vector<HistoryEvent> events_;
};

}  // namespace atcc
