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

#include "atcc/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <numeric>
#include <ostream>
#include <sstream>

#include "atcc/error.hpp"

namespace atcc {

using json = nlohmann::ordered_json;

double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

LatencySummary summarize_latency(std::vector<double> samples_ms) {
  LatencySummary s;
  if (samples_ms.empty()) return s;
  std::sort(samples_ms.begin(), samples_ms.end());
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / static_cast<double>(samples_ms.size());
  s.p50_ms = percentile_sorted(samples_ms, 0.50);
  s.p99_ms = percentile_sorted(samples_ms, 0.99);
  s.p9999_ms = percentile_sorted(samples_ms, 0.9999);
  s.max_ms = samples_ms.back();
  return s;
}

namespace {

json to_json(const LatencySummary& l) {
  return json{{"mean_ms", l.mean_ms}, {"p50_ms", l.p50_ms}, {"p99_ms", l.p99_ms}, {"p99_99_ms", l.p9999_ms}, {"max_ms", l.max_ms}};
}

json to_json(const ClassMetrics& c) {
  return json{{"commits", c.commits},       {"aborts", c.aborts}, {"throughput_tps", c.throughput_tps},
              {"abort_rate", c.abort_rate}, {"mean_ops", c.mean_ops}, {"t_avg", c.t_avg},
              {"latency", to_json(c.latency)}};
}

LatencySummary latency_from(const json& j) {
  LatencySummary l;
  l.mean_ms = j.at("mean_ms").get<double>();
  l.p50_ms = j.at("p50_ms").get<double>();
  l.p99_ms = j.at("p99_ms").get<double>();
  l.p9999_ms = j.at("p99_99_ms").get<double>();
  l.max_ms = j.at("max_ms").get<double>();
  return l;
}

ClassMetrics class_from(const json& j) {
  ClassMetrics c;
  c.commits = j.at("commits").get<std::uint64_t>();
  c.aborts = j.at("aborts").get<std::uint64_t>();
  c.throughput_tps = j.at("throughput_tps").get<double>();
  c.abort_rate = j.at("abort_rate").get<double>();
  c.mean_ops = j.at("mean_ops").get<double>();
  c.t_avg = j.at("t_avg").get<double>();
  c.latency = latency_from(j.at("latency"));
  return c;
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
  json j;
  j["schema"] = kReportSchema;
  j["schema_version"] = kReportSchemaVersion;
  j["counting"] = "each committed transaction counts once; abort_rate is aborted attempts over all attempts";
  j["protocol"] = r.protocol;
  j["workload"] = r.workload;
  j["contention"] = r.contention;
  j["runtime"] = r.runtime;
  j["threads"] = r.threads;
  j["duration_s"] = r.duration_s;
  j["seed"] = r.seed;
  j["omega"] = r.omega;
  j["backoff_scale"] = r.backoff_scale;
  j["classes"] = json{{"agentic", to_json(r.agentic)}, {"background", to_json(r.background)}, {"total", to_json(r.total)}};
  j["mean_lock_queue_len"] = r.mean_lock_queue_len;
  j["decisions"] = json::object();
  for (const auto& [k, v] : r.decisions) j["decisions"][k] = v;
  j["aborts_by_reason"] = json::object();
  for (const auto& [k, v] : r.aborts_by_reason) j["aborts_by_reason"][k] = v;
  j["boosts"] = r.boosts;
  j["escalations"] = r.escalations;
  j["lock_timeouts"] = r.lock_timeouts;
  j["decide_in_blocking"] = r.decide_in_blocking;
  j["refine_dropped"] = r.refine_dropped;
  j["windows"] = json::array();
  for (const WindowRow& w : r.windows) {
    j["windows"].push_back(json{{"index", w.index},
                                {"t_end_s", w.t_end_s},
                                {"agentic_commits", w.agentic_commits},
                                {"background_commits", w.background_commits},
                                {"agentic_aborts", w.agentic_aborts},
                                {"background_aborts", w.background_aborts},
                                {"tps", w.tps},
                                {"abort_rate", w.abort_rate},
                                {"mean_lock_queue_len", w.mean_lock_queue_len}});
  }
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    if (j.at("schema").get<std::string>() != kReportSchema) throw LoadError("not a bench report");
    if (int v = j.at("schema_version").get<int>(); v != kReportSchemaVersion) {
      throw LoadError("unsupported report schema version " + std::to_string(v));
    }
    MetricsReport r;
    r.protocol = j.at("protocol").get<std::string>();
    r.workload = j.at("workload").get<std::string>();
    r.contention = j.at("contention").get<std::string>();
    r.runtime = j.at("runtime").get<std::string>();
    r.threads = j.at("threads").get<std::uint64_t>();
    r.duration_s = j.at("duration_s").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.omega = j.at("omega").get<double>();
    r.backoff_scale = j.at("backoff_scale").get<double>();
    const json& c = j.at("classes");
    r.agentic = class_from(c.at("agentic"));
    r.background = class_from(c.at("background"));
    r.total = class_from(c.at("total"));
    r.mean_lock_queue_len = j.at("mean_lock_queue_len").get<double>();
    for (const auto& [k, v] : j.at("decisions").items()) r.decisions[k] = v.get<std::uint64_t>();
    for (const auto& [k, v] : j.at("aborts_by_reason").items()) r.aborts_by_reason[k] = v.get<std::uint64_t>();
    r.boosts = j.at("boosts").get<std::uint64_t>();
    r.escalations = j.at("escalations").get<std::uint64_t>();
    r.lock_timeouts = j.at("lock_timeouts").get<std::uint64_t>();
    r.decide_in_blocking = j.at("decide_in_blocking").get<std::uint64_t>();
    r.refine_dropped = j.at("refine_dropped").get<std::uint64_t>();
    for (const json& w : j.at("windows")) {
      WindowRow row;
      row.index = w.at("index").get<std::uint32_t>();
      row.t_end_s = w.at("t_end_s").get<double>();
      row.agentic_commits = w.at("agentic_commits").get<std::uint64_t>();
      row.background_commits = w.at("background_commits").get<std::uint64_t>();
      row.agentic_aborts = w.at("agentic_aborts").get<std::uint64_t>();
      row.background_aborts = w.at("background_aborts").get<std::uint64_t>();
      row.tps = w.at("tps").get<double>();
      row.abort_rate = w.at("abort_rate").get<double>();
      row.mean_lock_queue_len = w.at("mean_lock_queue_len").get<double>();
      r.windows.push_back(row);
    }
    return r;
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed report: ") + e.what());
  }
}

void write_csv(const MetricsReport& r, std::ostream& os) {
  os << "window,t_end_s,agentic_commits,background_commits,agentic_aborts,background_aborts,tps,abort_rate,"
        "mean_lock_queue_len\n";
  for (const WindowRow& w : r.windows) {
    os << w.index << ',' << w.t_end_s << ',' << w.agentic_commits << ',' << w.background_commits << ','
       << w.agentic_aborts << ',' << w.background_aborts << ',' << w.tps << ',' << w.abort_rate << ','
       << w.mean_lock_queue_len << '\n';
  }
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace atcc
