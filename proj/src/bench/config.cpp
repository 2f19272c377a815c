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

#include "atcc/bench/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "atcc/error.hpp"

namespace atcc {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

Nanos ms(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d < 0) throw ConfigError(key + ": must be non-negative");
  return Nanos(static_cast<std::int64_t>(std::llround(d * 1e6)));
}

std::vector<double> to_bounds(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

using Setter = std::function<void(BenchConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    // bench
    m["bench.protocol"] = [](BenchConfig& c, auto&, auto& v) { c.protocol = parse_protocol(v); };
    m["bench.threads"] = [](BenchConfig& c, auto& k, auto& v) { c.threads = to_u64(k, v); };
    m["bench.duration_s"] = [](BenchConfig& c, auto& k, auto& v) { c.duration_s = to_double(k, v); };
    m["bench.seed"] = [](BenchConfig& c, auto& k, auto& v) { c.seed = to_u64(k, v); };
    m["bench.runtime"] = [](BenchConfig& c, auto& k, auto& v) {
      if (v == "real") c.runtime = RuntimeKind::kReal;
      else if (v == "sim") c.runtime = RuntimeKind::kSim;
      else throw ConfigError(k + ": expected real or sim");
    };
    m["bench.verify"] = [](BenchConfig& c, auto& k, auto& v) { c.verify = to_bool(k, v); };
    m["bench.pin_threads"] = [](BenchConfig& c, auto& k, auto& v) { c.pin_threads = to_bool(k, v); };
    m["bench.report"] = [](BenchConfig& c, auto&, auto& v) { c.report_path = v; };
    m["bench.csv"] = [](BenchConfig& c, auto&, auto& v) { c.csv_path = v; };
    m["bench.history"] = [](BenchConfig& c, auto&, auto& v) { c.history_path = v; };
    m["bench.omega"] = [](BenchConfig& c, auto& k, auto& v) { c.omega = to_double(k, v); };
    // workload
    m["workload.kind"] = [](BenchConfig& c, auto&, auto& v) { c.workload.kind = parse_workload_kind(v); };
    m["workload.contention"] = [](BenchConfig& c, auto&, auto& v) { c.workload.contention = parse_contention(v); };
    m["workload.agentic_fraction"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.agentic_fraction = to_double(k, v); };
    m["workload.rows"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.ycsb_rows = to_u64(k, v); };
    m["workload.ops"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.ycsb_ops = to_u64(k, v); };
    m["workload.theta"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.theta = to_double(k, v); };
    m["workload.read_ratio"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.read_ratio = to_double(k, v); };
    m["workload.warehouses"] = [](BenchConfig& c, auto& k, auto& v) {
      std::uint64_t w = to_u64(k, v);
      if (w < 1 || w > 100'000) throw ConfigError(k + ": must be in [1, 100000]");
      c.workload.warehouses = static_cast<std::uint32_t>(w);
    };
    auto delay = [&m](const std::string& name, Nanos DelayModel::*field) {
      m["workload." + name] = [field](BenchConfig& c, auto& k, auto& v) { c.workload.delays.*field = ms(k, v); };
    };
    delay("delay_min_ms", &DelayModel::agentic_min);
    delay("delay_max_ms", &DelayModel::agentic_max);
    delay("backoff_min_ms", &DelayModel::agentic_backoff_min);
    delay("backoff_max_ms", &DelayModel::agentic_backoff_max);
    delay("bg_backoff_min_ms", &DelayModel::background_backoff_min);
    delay("bg_backoff_max_ms", &DelayModel::background_backoff_max);
    delay("explore_min_ms", &DelayModel::explore_min);
    delay("explore_max_ms", &DelayModel::explore_max);
    delay("refine_min_ms", &DelayModel::refine_min);
    delay("refine_max_ms", &DelayModel::refine_max);
    delay("commit_min_ms", &DelayModel::commit_min);
    delay("commit_max_ms", &DelayModel::commit_max);
    m["workload.backoff_scale"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.delays.backoff_scale = to_double(k, v); };
    m["workload.routes"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.flight.routes = to_u64(k, v); };
    m["workload.prices"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.flight.prices = to_u64(k, v); };
    m["workload.aircraft"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.flight.aircraft = to_u64(k, v); };
    m["workload.seats"] = [](BenchConfig& c, auto& k, auto& v) { c.workload.flight.seats = to_u64(k, v); };
    m["workload.intents"] = [](BenchConfig& c, auto& k, auto& v) {
      c.workload.flight.intents = static_cast<std::uint32_t>(to_u64(k, v));
    };
    // priority
    auto prio = [&m](const std::string& name, double PriorityParams::*field) {
      m["priority." + name] = [field](BenchConfig& c, auto& k, auto& v) { c.priority.*field = to_double(k, v); };
    };
    prio("alpha", &PriorityParams::alpha);
    prio("beta", &PriorityParams::beta);
    prio("lambda", &PriorityParams::lambda);
    prio("rho", &PriorityParams::rho);
    prio("delta_s", &PriorityParams::delta_s);
    prio("delta_b_ms", &PriorityParams::delta_b_ms);
    prio("delta_i_ms", &PriorityParams::delta_i_ms);
    // reward
    auto rew = [&m](const std::string& name, double RewardCoeffs::*field) {
      m["reward." + name] = [field](BenchConfig& c, auto& k, auto& v) { c.reward.*field = to_double(k, v); };
    };
    rew("b1", &RewardCoeffs::b1);
    rew("b2", &RewardCoeffs::b2);
    rew("a1_lat", &RewardCoeffs::a1_lat);
    rew("a2_tps", &RewardCoeffs::a2_tps);
    rew("a3_abort", &RewardCoeffs::a3_abort);
    rew("a_sql", &RewardCoeffs::a_sql);
    rew("a_interval", &RewardCoeffs::a_interval);
    rew("delta_s", &RewardCoeffs::delta_s);
    rew("delta_i_ms", &RewardCoeffs::delta_i_ms);
    // engine
    m["engine.policy_every_k"] = [](BenchConfig& c, auto& k, auto& v) { c.policy_every_k = static_cast<unsigned>(to_u64(k, v)); };
    m["engine.reevaluate_on_boost"] = [](BenchConfig& c, auto& k, auto& v) { c.locks.reevaluate_on_boost = to_bool(k, v); };
    m["engine.lock_timeout_ms"] = [](BenchConfig& c, auto& k, auto& v) { c.locks.wait_timeout = ms(k, v); };
    m["engine.lock_slice_ms"] = [](BenchConfig& c, auto& k, auto& v) { c.locks.wait_slice = ms(k, v); };
    m["engine.hot_fraction"] = [](BenchConfig& c, auto& k, auto& v) { c.hot_fraction = to_double(k, v); };
    m["engine.hot_min_accesses"] = [](BenchConfig& c, auto& k, auto& v) {
      c.hot_min_accesses = static_cast<std::uint32_t>(to_u64(k, v));
    };
    m["engine.wal"] = [](BenchConfig& c, auto&, auto& v) { c.wal_path = v; };
    // policy
    m["policy.table"] = [](BenchConfig& c, auto&, auto& v) { c.policy_table = v; };
    m["policy.refine"] = [](BenchConfig& c, auto& k, auto& v) { c.refine = to_bool(k, v); };
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      m[std::string("policy.bucket.") + feature_name(static_cast<Feature>(f))] = [f](BenchConfig& c, auto& k, auto& v) {
        c.buckets.bounds[f] = to_bounds(k, v);
      };
    }
    // train
    m["train.episodes"] = [](BenchConfig& c, auto& k, auto& v) { c.train.episodes = to_u64(k, v); };
    m["train.episode_s"] = [](BenchConfig& c, auto& k, auto& v) { c.train.episode_s = to_double(k, v); };
    m["train.epsilon"] = [](BenchConfig& c, auto& k, auto& v) { c.train.epsilon = to_double(k, v); };
    m["train.seed"] = [](BenchConfig& c, auto& k, auto& v) { c.train.seed = to_u64(k, v); };
    m["train.min_gain"] = [](BenchConfig& c, auto& k, auto& v) { c.train.min_gain = to_double(k, v); };
    m["train.min_visits"] = [](BenchConfig& c, auto& k, auto& v) { c.train.min_visits = to_u64(k, v); };
    return m;
  }();
  return table;
}

}  // namespace

void BenchConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (threads > 1024) throw ConfigError("threads must be at most 1024");
  if (!(duration_s > 0)) throw ConfigError("duration_s must be positive");
  if (!(omega >= 0)) throw ConfigError("omega must be non-negative");
  if (!(hot_fraction >= 0 && hot_fraction <= 1)) throw ConfigError("hot_fraction must be in [0, 1]");
  if (locks.wait_slice.count() <= 0 || locks.wait_timeout.count() <= 0) throw ConfigError("lock timeouts must be positive");
  if (!(train.epsilon >= 0 && train.epsilon <= 1)) throw ConfigError("train.epsilon must be in [0, 1]");
  if (!(train.episode_s > 0)) throw ConfigError("train.episode_s must be positive");
  if (!(train.min_gain >= 0)) throw ConfigError("train.min_gain must be non-negative");
  workload.validate();
  priority.validate();
  reward.validate();
  buckets.validate();
  if (policy_every_k == 0) throw ConfigError("policy_every_k must be at least 1");
}

EngineOptions BenchConfig::engine_options(std::size_t max_workers) const {
  EngineOptions o;
  o.protocol = protocol;
  o.max_workers = max_workers;
  o.priority = priority;
  o.policy_every_k = policy_every_k;
  o.locks = locks;
  o.buckets = buckets;
  o.wal_path = wal_path;
  o.record_history = verify;
  return o;
}

BenchConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  BenchConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of any section");
    for (const auto& [key, value] : body) {
      std::string full = section + "." + key;
      auto it = setters().find(full);
      if (it == setters().end()) throw ConfigError("unknown config key '" + full + "'");
      it->second(c, full, trim(value.data()));
    }
  }
  c.validate();
  return c;
}

BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace atcc
