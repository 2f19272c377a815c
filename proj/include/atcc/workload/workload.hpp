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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atcc/row_store.hpp"
#include "atcc/rng.hpp"
#include "atcc/runtime.hpp"
#include "atcc/txn_context.hpp"
#include "atcc/workload/zipf.hpp"

namespace atcc {

using namespace std::chrono_literals;

enum class WorkloadKind : std::uint8_t { kYcsb, kTpcc, kFlight };
enum class Contention : std::uint8_t { kLow, kMedium, kHigh };

const char* to_string(WorkloadKind k);
const char* to_string(Contention c);
// Throw ConfigError on unknown names.
WorkloadKind parse_workload_kind(std::string_view text);
Contention parse_contention(std::string_view text);

struct YcsbPreset {
  double theta;
  double read_ratio;
};

YcsbPreset ycsb_preset(Contention c);

inline constexpr double kDefaultOmega = 2703.0;
inline constexpr std::size_t kPayloadBytes = 100;
inline constexpr std::size_t kPayloadColumns = 10;

// Tokens an agent spends per transaction: (1 + abort_rate) * n_ops * omega.
double token_cost(double n_ops, double abort_rate, double omega);

struct DelayModel {
  // Agentic inter-operation reasoning delay.
  Nanos agentic_min = 1ms;
  Nanos agentic_max = 20ms;
  // Reasoning backoff of an agent after an abort, before the retry.
  Nanos agentic_backoff_min = 500ms;
  Nanos agentic_backoff_max = 5s;
  // Multiplier applied to the agentic backoff range.
  double backoff_scale = 1.0;
  Nanos background_backoff_min = 10ms;
  Nanos background_backoff_max = 30ms;
  // Flight agent delays per phase.
  Nanos explore_min = 1ms;
  Nanos explore_max = 20ms;
  Nanos refine_min = 20ms;
  Nanos refine_max = 200ms;
  Nanos commit_min = 1ms;
  Nanos commit_max = 10ms;
};

// Delay in [lo, hi] drawn uniformly at nanosecond resolution.
Nanos uniform_delay(Rng& rng, Nanos lo, Nanos hi);

// Pause before retrying an aborted transaction of the given class.
Nanos retry_backoff(const DelayModel& d, TxnKind kind, Rng& rng);

struct FlightSizes {
  std::uint64_t routes = 50'000;
  std::uint64_t prices = 200'000;
  std::uint64_t aircraft = 1'000;
  std::uint64_t seats = 500'000;
  std::uint32_t intents = 1'000;
};

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kYcsb;
  Contention contention = Contention::kHigh;
  double agentic_fraction = 0.8;
  std::uint64_t seed = 1;
  DelayModel delays;

  std::uint64_t ycsb_rows = 1'000'000;
  std::size_t ycsb_ops = 10;
  // Override the preset when set.
  std::optional<double> theta;
  std::optional<double> read_ratio;

  std::uint32_t warehouses = 1;

  FlightSizes flight;

  double effective_theta() const;
  double effective_read_ratio() const;

  // Throws ConfigError.
  void validate() const;
};

enum class OpKind : std::uint8_t { kRead, kWrite };
enum class AgentPhase : std::uint8_t { kNone, kExplore, kRefine, kCommit };

const char* to_string(AgentPhase p);

struct ScriptOp {
  OpKind kind = OpKind::kRead;
  Key key = 0;
  // Reasoning time before this operation is issued.
  Nanos think{0};
  AgentPhase phase = AgentPhase::kNone;
};

// One logical transaction, replayed unchanged on every retry.
struct TxnScript {
  TxnKind kind = TxnKind::kBackground;
  std::string label;
  std::uint32_t intent = 0;
  std::vector<ScriptOp> ops;

  std::size_t writes() const;
};

// Contiguous key range of one logical table.
struct TableRange {
  std::string name;
  Key base = 0;
  std::uint64_t rows = 0;
};

// Deterministic 100-byte payload: ten fixed-width columns derived from the
// key and a stamp.
std::string make_payload(Key key, std::uint64_t stamp);

class ScriptGenerator {
 public:
  virtual ~ScriptGenerator() = default;
  virtual TxnScript next(TxnKind kind) = 0;
};

// Immutable per-run workload: table layout plus shared sampling tables.
// Generators drawn from it are independent and deterministic per stream.
class Workload {
 public:
  explicit Workload(WorkloadSpec spec);
  ~Workload();

  const WorkloadSpec& spec() const { return spec_; }
  const std::vector<TableRange>& tables() const { return tables_; }
  const TableRange& table(std::string_view name) const;
  std::uint64_t key_count() const;

  // Writes the initial payload of every row.
  void load(RowStore& store) const;

  // Generator with its own stream derived from (seed, stream). The
  // one-argument form uses the spec's seed.
  std::unique_ptr<ScriptGenerator> generator(std::uint32_t stream) const { return generator(stream, spec_.seed); }
  std::unique_ptr<ScriptGenerator> generator(std::uint32_t stream, std::uint64_t seed) const;

  const ZipfDistribution* zipf() const { return zipf_.get(); }

 private:
  WorkloadSpec spec_;
  std::vector<TableRange> tables_;
  std::unique_ptr<ZipfDistribution> zipf_;
};

// Worker class assignment: the first round(fraction * workers) workers issue
// agentic transactions, the rest background ones.
std::size_t agentic_worker_count(std::size_t workers, double fraction);
TxnKind worker_kind(std::size_t index, std::size_t workers, double fraction);

// TPC-C scale used by the point-access reduction.
namespace tpcc {
inline constexpr std::uint32_t kDistricts = 10;
inline constexpr std::uint32_t kCustomersPerDistrict = 300;
inline constexpr std::uint32_t kItems = 1'000;
inline constexpr std::uint32_t kOrderRing = 64;
inline constexpr std::uint32_t kHistoryRing = 64;
inline constexpr std::uint32_t kOrderLines = 10;
}  // namespace tpcc

}  // namespace atcc
