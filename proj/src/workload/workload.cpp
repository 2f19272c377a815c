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

#include "atcc/workload/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "atcc/error.hpp"

namespace atcc {

const char* to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kYcsb: return "ycsb";
    case WorkloadKind::kTpcc: return "tpcc";
    case WorkloadKind::kFlight: return "flight";
  }
  return "?";
}

const char* to_string(Contention c) {
  switch (c) {
    case Contention::kLow: return "low";
    case Contention::kMedium: return "medium";
    case Contention::kHigh: return "high";
  }
  return "?";
}

const char* to_string(AgentPhase p) {
  switch (p) {
    case AgentPhase::kNone: return "none";
    case AgentPhase::kExplore: return "explore";
    case AgentPhase::kRefine: return "refine";
    case AgentPhase::kCommit: return "commit";
  }
  return "?";
}

WorkloadKind parse_workload_kind(std::string_view text) {
  if (text == "ycsb") return WorkloadKind::kYcsb;
  if (text == "tpcc") return WorkloadKind::kTpcc;
  if (text == "flight") return WorkloadKind::kFlight;
  throw ConfigError("unknown workload '" + std::string(text) + "'");
}

Contention parse_contention(std::string_view text) {
  if (text == "low") return Contention::kLow;
  if (text == "medium") return Contention::kMedium;
  if (text == "high") return Contention::kHigh;
  throw ConfigError("unknown contention preset '" + std::string(text) + "'");
}

YcsbPreset ycsb_preset(Contention c) {
  switch (c) {
    case Contention::kLow: return {0.0, 0.95};
    case Contention::kMedium: return {0.7, 0.90};
    case Contention::kHigh: return {0.99, 0.50};
  }
  throw ConfigError("unknown contention preset");
}

double token_cost(double n_ops, double abort_rate, double omega) { return (1.0 + abort_rate) * n_ops * omega; }

Nanos uniform_delay(Rng& rng, Nanos lo, Nanos hi) {
  if (hi <= lo) return lo;
  return Nanos(static_cast<std::int64_t>(uniform_int(rng, static_cast<std::uint64_t>(lo.count()),
                                                     static_cast<std::uint64_t>(hi.count()))));
}

Nanos retry_backoff(const DelayModel& d, TxnKind kind, Rng& rng) {
  if (kind == TxnKind::kBackground) return uniform_delay(rng, d.background_backoff_min, d.background_backoff_max);
  auto scale = [&](Nanos x) { return Nanos(static_cast<std::int64_t>(std::llround(static_cast<double>(x.count()) * d.backoff_scale))); };
  return uniform_delay(rng, scale(d.agentic_backoff_min), scale(d.agentic_backoff_max));
}

double WorkloadSpec::effective_theta() const { return theta.value_or(ycsb_preset(contention).theta); }
double WorkloadSpec::effective_read_ratio() const { return read_ratio.value_or(ycsb_preset(contention).read_ratio); }

void WorkloadSpec::validate() const {
  if (!(agentic_fraction >= 0.0 && agentic_fraction <= 1.0)) throw ConfigError("agentic_fraction must be in [0, 1]");
  auto ordered = [](Nanos lo, Nanos hi, const char* what) {
    if (lo.count() < 0 || hi < lo) throw ConfigError(std::string(what) + ": need 0 <= min <= max");
  };
  ordered(delays.agentic_min, delays.agentic_max, "agentic delay");
  ordered(delays.agentic_backoff_min, delays.agentic_backoff_max, "agentic backoff");
  ordered(delays.background_backoff_min, delays.background_backoff_max, "background backoff");
  ordered(delays.explore_min, delays.explore_max, "explore delay");
  ordered(delays.refine_min, delays.refine_max, "refine delay");
  ordered(delays.commit_min, delays.commit_max, "commit delay");
  if (!(delays.backoff_scale > 0.0)) throw ConfigError("backoff_scale must be positive");
  switch (kind) {
    case WorkloadKind::kYcsb: {
      if (ycsb_rows == 0) throw ConfigError("ycsb rows must be at least 1");
      if (ycsb_ops == 0) throw ConfigError("ycsb ops per transaction must be at least 1");
      double t = effective_theta();
      double r = effective_read_ratio();
      if (!(t >= 0.0)) throw ConfigError("theta must be >= 0");
      if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("read_ratio must be in [0, 1]");
      break;
    }
    case WorkloadKind::kTpcc:
      if (warehouses < 1) throw ConfigError("tpcc needs at least one warehouse");
      break;
    case WorkloadKind::kFlight:
      if (flight.routes == 0 || flight.aircraft == 0 || flight.intents == 0 || flight.prices < flight.routes ||
          flight.seats < flight.aircraft) {
        throw ConfigError("flight table sizes must be positive, with prices >= routes and seats >= aircraft");
      }
      break;
  }
}

std::size_t TxnScript::writes() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const ScriptOp& o) { return o.kind == OpKind::kWrite; }));
}

std::string make_payload(Key key, std::uint64_t stamp) {
  std::string out(kPayloadBytes, '0');
  char buf[24];
  for (std::size_t c = 0; c < kPayloadColumns; ++c) {
    std::uint64_t h = derive_seed(key * 31 + stamp, c) % 10'000'000'000ULL;
    std::snprintf(buf, sizeof buf, "%010llu", static_cast<unsigned long long>(h));
    out.replace(c * 10, 10, buf, 10);
  }
  return out;
}

std::size_t agentic_worker_count(std::size_t workers, double fraction) {
  return std::min(workers, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(workers))));
}

TxnKind worker_kind(std::size_t index, std::size_t workers, double fraction) {
  return index < agentic_worker_count(workers, fraction) ? TxnKind::kAgentic : TxnKind::kBackground;
}

namespace {

Nanos agent_delay(const DelayModel& d, AgentPhase phase, Rng& rng) {
  switch (phase) {
    case AgentPhase::kExplore: return uniform_delay(rng, d.explore_min, d.explore_max);
    case AgentPhase::kRefine: return uniform_delay(rng, d.refine_min, d.refine_max);
    case AgentPhase::kCommit: return uniform_delay(rng, d.commit_min, d.commit_max);
    case AgentPhase::kNone: break;
  }
  return uniform_delay(rng, d.agentic_min, d.agentic_max);
}

// Reasoning gaps between consecutive operations of an agentic script.
void add_think_times(TxnScript& s, const DelayModel& d, Rng& rng) {
  if (s.kind != TxnKind::kAgentic) return;
  for (std::size_t i = 1; i < s.ops.size(); ++i) s.ops[i].think = agent_delay(d, s.ops[i].phase, rng);
}

class YcsbGenerator final : public ScriptGenerator {
 public:
  YcsbGenerator(const Workload& w, std::uint32_t stream, std::uint64_t seed)
      : w_(w), rng_(derive_seed(seed, stream)), read_ratio_(w.spec().effective_read_ratio()) {}

  TxnScript next(TxnKind kind) override {
    TxnScript s;
    s.kind = kind;
    s.label = "ycsb";
    s.ops.reserve(w_.spec().ycsb_ops);
    for (std::size_t i = 0; i < w_.spec().ycsb_ops; ++i) {
      ScriptOp op;
      op.key = (*w_.zipf())(rng_);
      op.kind = bernoulli(rng_, read_ratio_) ? OpKind::kRead : OpKind::kWrite;
      s.ops.push_back(op);
    }
    add_think_times(s, w_.spec().delays, rng_);
    return s;
  }

 private:
  const Workload& w_;
  Rng rng_;
  double read_ratio_;
};

class TpccGenerator final : public ScriptGenerator {
 public:
  TpccGenerator(const Workload& w, std::uint32_t stream, std::uint64_t seed)
      : w_(w),
        rng_(derive_seed(seed, stream)),
        nw_(w.spec().warehouses),
        home_(stream % w.spec().warehouses),
        wh_(w.table("warehouse")),
        dist_(w.table("district")),
        cust_(w.table("customer")),
        stock_(w.table("stock")),
        order_(w.table("order")),
        hist_(w.table("history")) {}

  TxnScript next(TxnKind kind) override {
    TxnScript s = bernoulli(rng_, 0.5) ? payment() : new_order();
    s.kind = kind;
    add_think_times(s, w_.spec().delays, rng_);
    return s;
  }

 private:
  std::uint64_t pick_d() { return uniform_int(rng_, 0, tpcc::kDistricts - 1); }
  std::uint64_t other_warehouse() {
    if (nw_ == 1) return home_;
    std::uint64_t w = uniform_int(rng_, 0, nw_ - 2);
    return w >= home_ ? w + 1 : w;
  }
  Key district_key(std::uint64_t w, std::uint64_t d) { return dist_.base + w * tpcc::kDistricts + d; }
  Key customer_key(std::uint64_t w, std::uint64_t d, std::uint64_t c) {
    return cust_.base + (w * tpcc::kDistricts + d) * tpcc::kCustomersPerDistrict + c;
  }
  static void rw(TxnScript& s, Key k) {
    s.ops.push_back(ScriptOp{OpKind::kRead, k});
    s.ops.push_back(ScriptOp{OpKind::kWrite, k});
  }

  TxnScript payment() {
    TxnScript s;
    s.label = "payment";
    std::uint64_t d = pick_d();
    rw(s, wh_.base + home_);
    rw(s, district_key(home_, d));
    std::uint64_t cw = nw_ > 1 && bernoulli(rng_, 0.15) ? other_warehouse() : home_;
    rw(s, customer_key(cw, pick_d(), uniform_int(rng_, 0, tpcc::kCustomersPerDistrict - 1)));
    s.ops.push_back(ScriptOp{OpKind::kWrite,
                             hist_.base + (home_ * tpcc::kDistricts + d) * tpcc::kHistoryRing +
                                 uniform_int(rng_, 0, tpcc::kHistoryRing - 1)});
    return s;
  }

  TxnScript new_order() {
    TxnScript s;
    s.label = "new_order";
    std::uint64_t d = pick_d();
    s.ops.push_back(ScriptOp{OpKind::kRead, wh_.base + home_});
    rw(s, district_key(home_, d));
    s.ops.push_back(ScriptOp{OpKind::kRead, customer_key(home_, d, uniform_int(rng_, 0, tpcc::kCustomersPerDistrict - 1))});
    std::vector<std::uint64_t> items;
    while (items.size() < tpcc::kOrderLines) {
      std::uint64_t i = uniform_int(rng_, 0, tpcc::kItems - 1);
      if (std::find(items.begin(), items.end(), i) == items.end()) items.push_back(i);
    }
    for (std::uint64_t i : items) {
      std::uint64_t sw = nw_ > 1 && bernoulli(rng_, 0.01) ? other_warehouse() : home_;
      rw(s, stock_.base + sw * tpcc::kItems + i);
    }
    s.ops.push_back(ScriptOp{OpKind::kWrite, order_.base + (home_ * tpcc::kDistricts + d) * tpcc::kOrderRing +
                                                 uniform_int(rng_, 0, tpcc::kOrderRing - 1)});
    return s;
  }

  const Workload& w_;
  Rng rng_;
  std::uint64_t nw_;
  std::uint64_t home_;
  TableRange wh_, dist_, cust_, stock_, order_, hist_;
};

class FlightGenerator final : public ScriptGenerator {
 public:
  static constexpr std::uint64_t kRoutesPerIntent = 20;
  static constexpr std::uint64_t kBookableSeats = 50;

  FlightGenerator(const Workload& w, std::uint32_t stream, std::uint64_t seed)
      : w_(w),
        sizes_(w.spec().flight),
        rng_(derive_seed(seed, stream)),
        routes_(w.table("routes")),
        prices_(w.table("prices")),
        aircraft_(w.table("aircraft")),
        seats_(w.table("seats")) {}

  TxnScript next(TxnKind kind) override {
    TxnScript s;
    s.kind = kind;
    s.label = "flight";
    s.intent = static_cast<std::uint32_t>((*w_.zipf())(rng_));
    const std::uint64_t n_explore = uniform_int(rng_, 2, 7);
    const std::uint64_t n_refine = uniform_int(rng_, 1, 4);
    const std::uint64_t n_commit = uniform_int(rng_, 1, 3);

    std::vector<std::uint64_t> explored;
    for (std::uint64_t i = 0; i < n_explore; ++i) {
      std::uint64_t route = intent_route(s.intent, uniform_int(rng_, 0, kRoutesPerIntent - 1));
      explored.push_back(route);
      Key k;
      switch (uniform_int(rng_, 0, 2)) {
        case 0: k = routes_.base + route; break;
        case 1: k = price_key(route); break;
        default: k = aircraft_.base + aircraft_of(route); break;
      }
      s.ops.push_back(ScriptOp{OpKind::kRead, k, Nanos{0}, AgentPhase::kExplore});
    }
    std::uint64_t chosen = explored.front();
    for (std::uint64_t i = 0; i < n_refine; ++i) {
      chosen = explored[uniform_int(rng_, 0, explored.size() - 1)];
      Key k = bernoulli(rng_, 0.5) ? price_key(chosen) : seat_key(chosen);
      OpKind kind_of = bernoulli(rng_, 0.03) ? OpKind::kWrite : OpKind::kRead;
      s.ops.push_back(ScriptOp{kind_of, k, Nanos{0}, AgentPhase::kRefine});
    }
    for (std::uint64_t i = 0; i < n_commit; ++i) {
      if (bernoulli(rng_, 0.8)) {
        Key k = bernoulli(rng_, 0.7) ? seat_key(chosen) : price_key(chosen);
        s.ops.push_back(ScriptOp{OpKind::kWrite, k, Nanos{0}, AgentPhase::kCommit});
      } else {
        s.ops.push_back(ScriptOp{OpKind::kRead, seat_key(chosen), Nanos{0}, AgentPhase::kCommit});
      }
    }
    add_think_times(s, w_.spec().delays, rng_);
    return s;
  }

 private:
  std::uint64_t intent_route(std::uint32_t intent, std::uint64_t j) const {
    return derive_seed(intent, j) % sizes_.routes;
  }
  std::uint64_t aircraft_of(std::uint64_t route) const { return route % sizes_.aircraft; }
  Key price_key(std::uint64_t route) {
    const std::uint64_t per_route = sizes_.prices / sizes_.routes;
    return prices_.base + route * per_route + uniform_int(rng_, 0, per_route - 1);
  }
  Key seat_key(std::uint64_t route) {
    const std::uint64_t per_aircraft = sizes_.seats / sizes_.aircraft;
    return seats_.base + aircraft_of(route) * per_aircraft +
           uniform_int(rng_, 0, std::min(kBookableSeats, per_aircraft) - 1);
  }

  const Workload& w_;
  FlightSizes sizes_;
  Rng rng_;
  TableRange routes_, prices_, aircraft_, seats_;
};

}  // namespace

Workload::Workload(WorkloadSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  Key base = 0;
  auto add = [&](std::string name, std::uint64_t rows) {
    tables_.push_back(TableRange{std::move(name), base, rows});
    base += rows;
  };
  switch (spec_.kind) {
    case WorkloadKind::kYcsb:
      add("usertable", spec_.ycsb_rows);
      zipf_ = std::make_unique<ZipfDistribution>(spec_.ycsb_rows, spec_.effective_theta());
      break;
    case WorkloadKind::kTpcc: {
      const std::uint64_t w = spec_.warehouses;
      add("warehouse", w);
      add("district", w * tpcc::kDistricts);
      add("customer", w * tpcc::kDistricts * tpcc::kCustomersPerDistrict);
      add("stock", w * tpcc::kItems);
      add("order", w * tpcc::kDistricts * tpcc::kOrderRing);
      add("history", w * tpcc::kDistricts * tpcc::kHistoryRing);
      break;
    }
    case WorkloadKind::kFlight:
      add("routes", spec_.flight.routes);
      add("prices", spec_.flight.prices);
      add("aircraft", spec_.flight.aircraft);
      add("seats", spec_.flight.seats);
      zipf_ = std::make_unique<ZipfDistribution>(spec_.flight.intents, 0.8);
      break;
  }
}

Workload::~Workload() = default;

const TableRange& Workload::table(std::string_view name) const {
  for (const TableRange& t : tables_) {
    if (t.name == name) return t;
  }
  throw NotFoundError("no table '" + std::string(name) + "' in workload " + to_string(spec_.kind));
}

std::uint64_t Workload::key_count() const { return tables_.empty() ? 0 : tables_.back().base + tables_.back().rows; }

void Workload::load(RowStore& store) const {
  if (store.size() < key_count()) throw ConfigError("row store too small for workload");
  for (Key k = 0; k < key_count(); ++k) store.load(k, make_payload(k, 0));
}

std::unique_ptr<ScriptGenerator> Workload::generator(std::uint32_t stream, std::uint64_t seed) const {
  switch (spec_.kind) {
    case WorkloadKind::kYcsb: return std::make_unique<YcsbGenerator>(*this, stream, seed);
    case WorkloadKind::kTpcc: return std::make_unique<TpccGenerator>(*this, stream, seed);
    case WorkloadKind::kFlight: return std::make_unique<FlightGenerator>(*this, stream, seed);
  }
  throw ConfigError("unknown workload kind");
}

}  // namespace atcc
