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
#include <vector>

#include "atcc/error.hpp"
#include "atcc/history.hpp"

namespace atcc {

// Transactions are identified by their attempt serial. Serial 0 is the
// sentinel that wrote version 0 of every key.
inline constexpr std::uint64_t kInitialTxn = 0;

enum class EdgeKind : std::uint8_t { kWw, kWr, kRw };

const char* to_string(EdgeKind k);

struct Edge {
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  EdgeKind kind = EdgeKind::kWw;
  Key key = 0;

  bool operator==(const Edge&) const = default;
};

// A committed read of a version that no committed transaction produced.
struct DirtyRead {
  std::uint64_t reader = 0;
  Key key = 0;
  Version version = 0;
};

struct SerializationGraph {
  std::vector<std::uint64_t> nodes;  // committed transactions, sentinel first
  std::vector<Edge> edges;
  std::vector<DirtyRead> dirty_reads;
};

// Conflict graph over committed transactions. Aborted and unfinished
// attempts are ignored.
SerializationGraph build_graph(const std::vector<HistoryEvent>& history);

struct CycleResult {
  bool acyclic = true;
  std::vector<std::uint64_t> cycle;  // one witness cycle when not acyclic
};

CycleResult check_acyclic(const SerializationGraph& g);

class OracleSizeError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kBruteForceLimit = 6;

// Tries every serial order of the committed transactions and accepts when
// one of them gives every read the version it observed and leaves every key
// with its last committed writer. Throws OracleSizeError past
// kBruteForceLimit transactions.
bool brute_force_serializable(const std::vector<HistoryEvent>& history);

struct OracleVerdict {
  bool serializable = true;  // no dirty read and acyclic
  SerializationGraph graph;
  CycleResult cycle;
  std::string describe() const;
};

OracleVerdict check_history(const std::vector<HistoryEvent>& history);

}  // namespace atcc
