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

#include "atcc/history.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "atcc/error.hpp"

namespace atcc {

char event_code(EventType t) {
  switch (t) {
    case EventType::kBegin: return 'B';
    case EventType::kRead: return 'R';
    case EventType::kWrite: return 'W';
    case EventType::kCommit: return 'C';
    case EventType::kAbort: return 'A';
  }
  return '?';
}

void History::append(const HistoryEvent& e) {
  std::lock_guard lk(mu_);
  events_.push_back(e);
}

std::vector<HistoryEvent> History::events() const {
  std::lock_guard lk(mu_);
  return events_;
}

std::size_t History::size() const {
  std::lock_guard lk(mu_);
  return events_.size();
}

void History::clear() {
  std::lock_guard lk(mu_);
  events_.clear();
}

void History::write_lines(std::ostream& os, const std::vector<HistoryEvent>& events) {
  for (const HistoryEvent& e : events) {
    os << event_code(e.type) << ' ' << e.txn << ' ' << e.tid.raw() << ' ' << e.key << ' ' << e.version << ' '
       << e.csn << ' ' << e.ts_ns << '\n';
  }
}

std::vector<HistoryEvent> History::read_lines(std::istream& is) {
  std::vector<HistoryEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    char code = 0;
    HistoryEvent e;
    std::uint64_t tid_raw = 0;
    if (!(ls >> code >> e.txn >> tid_raw >> e.key >> e.version >> e.csn >> e.ts_ns)) {
      throw LoadError("malformed history line " + std::to_string(lineno));
    }
    switch (code) {
      case 'B': e.type = EventType::kBegin; break;
      case 'R': e.type = EventType::kRead; break;
      case 'W': e.type = EventType::kWrite; break;
      case 'C': e.type = EventType::kCommit; break;
      case 'A': e.type = EventType::kAbort; break;
      default: throw LoadError("unknown event code on history line " + std::to_string(lineno));
    }
    e.tid = TransactionId::from_raw(tid_raw);
    out.push_back(e);
  }
  return out;
}

}  // namespace atcc
