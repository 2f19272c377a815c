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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace atcc {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kReportSchema = "atcc.bench.report";

struct LatencySummary {
  double mean_ms = 0;
  double p50_ms = 0;
  double p99_ms = 0;
  double p9999_ms = 0;
  double max_ms = 0;

  bool operator==(const LatencySummary&) const = default;
};

// Metrics of one transaction class. Latency is end to end: from the first
// submission of a logical transaction until its commit, retries included.
struct ClassMetrics {
  std::uint64_t commits = 0;
  std::uint64_t aborts = 0;  // aborted attempts
  double throughput_tps = 0;
  double abort_rate = 0;  // aborted attempts / all attempts
  double mean_ops = 0;    // operations per committed transaction
  double t_avg = 0;       // token cost per transaction
  LatencySummary latency;

  bool operator==(const ClassMetrics&) const = default;
};

struct WindowRow {
  std::uint32_t index = 0;
  double t_end_s = 0;
  std::uint64_t agentic_commits = 0;
  std::uint64_t background_commits = 0;
  std::uint64_t agentic_aborts = 0;
  std::uint64_t background_aborts = 0;
  double tps = 0;
  double abort_rate = 0;
  double mean_lock_queue_len = 0;

  bool operator==(const WindowRow&) const = default;
};

struct MetricsReport {
  std::string protocol;
  std::string workload;
  std::string contention;
  std::string runtime;
  std::uint64_t threads = 0;
  double duration_s = 0;
  std::uint64_t seed = 0;
  double omega = 0;
  double backoff_scale = 1;

  ClassMetrics agentic;
  ClassMetrics background;
  ClassMetrics total;

  double mean_lock_queue_len = 0;
  std::map<std::string, std::uint64_t> decisions;  // by action-set name
  std::map<std::string, std::uint64_t> aborts_by_reason;  // "<class>.<reason>"
  std::uint64_t boosts = 0;
  std::uint64_t escalations = 0;
  std::uint64_t lock_timeouts = 0;
  std::uint64_t decide_in_blocking = 0;
  std::uint64_t refine_dropped = 0;
  std::vector<WindowRow> windows;

  bool operator==(const MetricsReport&) const = default;
};

// Nearest-rank percentile of an ascending sample; 0 for an empty one.
double percentile_sorted(const std::vector<double>& sorted, double q);

// Sorts `samples` and summarizes them exactly.
LatencySummary summarize_latency(std::vector<double> samples_ms);

std::string report_to_json(const MetricsReport& r);
// Throws LoadError on malformed input or an unknown schema version.
MetricsReport report_from_json(const std::string& text);

// Header plus one row per window.
void write_csv(const MetricsReport& r, std::ostream& os);

// Throws IoError.
void save_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace atcc
