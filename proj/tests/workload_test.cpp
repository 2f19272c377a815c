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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "atcc/error.hpp"
#include "atcc/rng.hpp"
#include "atcc/row_store.hpp"
#include "atcc/workload/workload.hpp"
#include "atcc/workload/zipf.hpp"

namespace atcc {
namespace {

WorkloadSpec ycsb(Contention c, std::uint64_t rows = 1000) {
  WorkloadSpec s;
  s.kind = WorkloadKind::kYcsb;
  s.contention = c;
  s.ycsb_rows = rows;
  return s;
}

TEST(YcsbTest, PresetsMatchContentionLevels) {
  EXPECT_DOUBLE_EQ(ycsb_preset(Contention::kLow).theta, 0.0);
  EXPECT_DOUBLE_EQ(ycsb_preset(Contention::kLow).read_ratio, 0.95);
  EXPECT_DOUBLE_EQ(ycsb_preset(Contention::kHigh).theta, 0.99);
  EXPECT_DOUBLE_EQ(ycsb_preset(Contention::kHigh).read_ratio, 0.5);
  WorkloadSpec s = ycsb(Contention::kHigh);
  s.theta = 0.5;
  EXPECT_DOUBLE_EQ(s.effective_theta(), 0.5);
  EXPECT_DOUBLE_EQ(s.effective_read_ratio(), 0.5);
}

TEST(YcsbTest, ScriptsHaveTenOpsAndTheReadMix) {
  Workload w(ycsb(Contention::kLow));
  auto gen = w.generator(0);
  std::size_t reads = 0, ops = 0;
  for (int i = 0; i < 4000; ++i) {
    TxnScript s = gen->next(TxnKind::kAgentic);
    ASSERT_EQ(s.ops.size(), 10u);
    EXPECT_EQ(s.ops[0].think, Nanos(0));
    for (std::size_t j = 1; j < s.ops.size(); ++j) {
      EXPECT_GE(s.ops[j].think, Nanos(1'000'000));
      EXPECT_LE(s.ops[j].think, Nanos(20'000'000));
    }
    for (const auto& op : s.ops) {
      reads += op.kind == OpKind::kRead;
      ++ops;
      EXPECT_LT(op.key, 1000u);
    }
  }
  EXPECT_NEAR(static_cast<double>(reads) / ops, 0.95, 0.01);
}

TEST(YcsbTest, BackgroundScriptsDoNotThink) {
  Workload w(ycsb(Contention::kHigh));
  TxnScript s = w.generator(1)->next(TxnKind::kBackground);
  for (const auto& op : s.ops) EXPECT_EQ(op.think, Nanos(0));
}

std::vector<Key> keys_of(const Workload& w, std::uint32_t stream, std::uint64_t seed, int n) {
  auto gen = w.generator(stream, seed);
  std::vector<Key> out;
  for (int i = 0; i < n; ++i)
    for (const auto& op : gen->next(TxnKind::kAgentic).ops) out.push_back(op.key);
  return out;
}

TEST(YcsbTest, SameSeedSameScripts) {
  Workload w(ycsb(Contention::kHigh));
  EXPECT_EQ(keys_of(w, 3, 7, 50), keys_of(w, 3, 7, 50));
  EXPECT_NE(keys_of(w, 3, 7, 50), keys_of(w, 4, 7, 50));
  EXPECT_NE(keys_of(w, 3, 7, 50), keys_of(w, 3, 8, 50));
}

TEST(YcsbTest, InvalidSpecsAreRejected) {
  WorkloadSpec s = ycsb(Contention::kHigh);
  s.read_ratio = 1.5;
  EXPECT_THROW(Workload{s}, ConfigError);
  s = ycsb(Contention::kHigh, 0);
  EXPECT_THROW(Workload{s}, ConfigError);
  s = ycsb(Contention::kHigh);
  s.agentic_fraction = -0.1;
  EXPECT_THROW(Workload{s}, ConfigError);
  s = ycsb(Contention::kHigh);
  s.delays.agentic_min = Nanos(5);
  s.delays.agentic_max = Nanos(4);
  EXPECT_THROW(Workload{s}, ConfigError);
  EXPECT_THROW(parse_contention("extreme"), ConfigError);
  EXPECT_THROW(parse_workload_kind("tpch"), ConfigError);
}

TEST(YcsbTest, LoadFillsEveryRow) {
  Workload w(ycsb(Contention::kLow, 64));
  RowStore store(64, kPayloadBytes);
  w.load(store);
  RowStore small(10, kPayloadBytes);
  EXPECT_THROW(w.load(small), ConfigError);
  EXPECT_EQ(make_payload(5, 0).size(), 100u);
  EXPECT_EQ(make_payload(5, 0), make_payload(5, 0));
  EXPECT_NE(make_payload(5, 0), make_payload(6, 0));
}

TEST(ZipfTest, ThetaZeroIsUniform) {
  ZipfDistribution z(10, 0.0);
  Rng rng(21);
  std::vector<int> hist(10, 0);
  const int draws = 100'000;
  for (int i = 0; i < draws; ++i) ++hist[z(rng)];
  const double p = 0.1, sigma = std::sqrt(draws * p * (1 - p));
  for (int h : hist) EXPECT_NEAR(h, draws * p, 3 * sigma);
}

TEST(ZipfTest, FrequenciesFollowThePmf) {
  ZipfDistribution z(100, 0.99);
  Rng rng(5);
  std::vector<int> hist(100, 0);
  const int draws = 400'000;
  for (int i = 0; i < draws; ++i) ++hist[z(rng)];
  for (std::uint64_t i : {0u, 1u, 9u, 99u}) {
    const double p = z.pmf(i), sigma = std::sqrt(draws * p * (1 - p));
    EXPECT_NEAR(hist[i], draws * p, 4 * sigma) << i;
  }
  // Exact ratio between the first two ranks.
  EXPECT_NEAR(z.pmf(0) / z.pmf(1), std::pow(2.0, 0.99), 1e-12);
}

TEST(ZipfTest, TopTenPercentMass) {
  EXPECT_NEAR(zipf_top_mass(1000, 0.99, 100), 0.6850, 5e-5);
  EXPECT_NEAR(zipf_top_mass(10'000, 0.99, 1000), 0.7559, 5e-5);
  EXPECT_DOUBLE_EQ(zipf_top_mass(10, 0.0, 3), 0.3);
  EXPECT_DOUBLE_EQ(generalized_harmonic(3, 1.0), 1.0 + 0.5 + 1.0 / 3.0);
}

TEST(ZipfTest, RejectsBadParameters) {
  EXPECT_THROW(ZipfDistribution(0, 0.5), ConfigError);
  EXPECT_THROW(ZipfDistribution(10, -1.0), ConfigError);
}

TEST(TokenCostTest, AveragePerTransaction) {
  EXPECT_DOUBLE_EQ(token_cost(10, 0.0, kDefaultOmega), 27'030.0);
  EXPECT_DOUBLE_EQ(token_cost(10, 1.0, kDefaultOmega), 54'060.0);
  EXPECT_DOUBLE_EQ(token_cost(0, 0.5, kDefaultOmega), 0.0);
}

TEST(BackoffTest, RangesPerKind) {
  DelayModel d;
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    Nanos a = retry_backoff(d, TxnKind::kAgentic, rng);
    EXPECT_GE(a, Nanos(500'000'000));
    EXPECT_LE(a, Nanos(5'000'000'000));
    Nanos b = retry_backoff(d, TxnKind::kBackground, rng);
    EXPECT_GE(b, Nanos(10'000'000));
    EXPECT_LE(b, Nanos(30'000'000));
  }
  d.backoff_scale = 0.1;
  for (int i = 0; i < 1000; ++i) {
    Nanos a = retry_backoff(d, TxnKind::kAgentic, rng);
    EXPECT_GE(a, Nanos(50'000'000));
    EXPECT_LE(a, Nanos(500'000'000));
  }
}

TEST(WorkerKindTest, AgenticWorkersComeFirst) {
  EXPECT_EQ(agentic_worker_count(10, 0.8), 8u);
  EXPECT_EQ(agentic_worker_count(3, 1.0), 3u);
  EXPECT_EQ(agentic_worker_count(3, 0.0), 0u);
  EXPECT_EQ(worker_kind(7, 10, 0.8), TxnKind::kAgentic);
  EXPECT_EQ(worker_kind(8, 10, 0.8), TxnKind::kBackground);
}

WorkloadSpec tpcc(std::uint32_t warehouses) {
  WorkloadSpec s;
  s.kind = WorkloadKind::kTpcc;
  s.warehouses = warehouses;
  return s;
}

TEST(TpccTest, TableLayout) {
  Workload w(tpcc(2));
  EXPECT_EQ(w.table("warehouse").rows, 2u);
  EXPECT_EQ(w.table("district").rows, 20u);
  EXPECT_EQ(w.table("customer").rows, 6000u);
  EXPECT_EQ(w.table("stock").rows, 2000u);
  EXPECT_EQ(w.key_count(), 2u + 20 + 6000 + 2000 + 1280 + 1280);
  EXPECT_THROW(w.table("item"), NotFoundError);
}

TEST(TpccTest, NewOrderUpdatesTenStockRows) {
  Workload w(tpcc(1));
  const TableRange& stock = w.table("stock");
  auto gen = w.generator(0);
  int new_orders = 0, payments = 0;
  for (int i = 0; i < 500; ++i) {
    TxnScript s = gen->next(TxnKind::kAgentic);
    if (s.label == "new_order") {
      ++new_orders;
      std::set<Key> read, written;
      for (const auto& op : s.ops) {
        if (op.key < stock.base || op.key >= stock.base + stock.rows) continue;
        (op.kind == OpKind::kRead ? read : written).insert(op.key);
      }
      EXPECT_EQ(read.size(), 10u);
      EXPECT_EQ(read, written);
    } else {
      ASSERT_EQ(s.label, "payment");
      ++payments;
      EXPECT_EQ(s.ops.size(), 7u);
    }
  }
  EXPECT_NEAR(new_orders, 250, 50);
  EXPECT_EQ(new_orders + payments, 500);
}

TEST(TpccTest, SingleWarehouseSharesOneRow) {
  Workload w(tpcc(1));
  const Key wh = w.table("warehouse").base;
  for (std::uint32_t stream = 0; stream < 4; ++stream) {
    auto gen = w.generator(stream);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(gen->next(TxnKind::kAgentic).ops.front().key, wh);
  }
}

// Share of warehouse-partitioned accesses that stay on the stream's home
// warehouse.
double home_share(const Workload& w, std::uint32_t stream) {
  const std::uint64_t home = stream % w.spec().warehouses;
  const TableRange& stock = w.table("stock");
  const TableRange& cust = w.table("customer");
  auto gen = w.generator(stream);
  std::size_t local = 0, total = 0;
  for (int i = 0; i < 2000; ++i) {
    for (const auto& op : gen->next(TxnKind::kBackground).ops) {
      std::uint64_t owner;
      if (op.key >= stock.base && op.key < stock.base + stock.rows) {
        owner = (op.key - stock.base) / tpcc::kItems;
      } else if (op.key >= cust.base && op.key < cust.base + cust.rows) {
        owner = (op.key - cust.base) / (tpcc::kDistricts * tpcc::kCustomersPerDistrict);
      } else {
        continue;
      }
      ++total;
      local += owner == home;
    }
  }
  return static_cast<double>(local) / static_cast<double>(total);
}

TEST(TpccTest, ManyWarehousesStayMostlyLocal) {
  Workload w(tpcc(100));
  const double share = home_share(w, 37);
  EXPECT_GT(share, 0.95);
  EXPECT_LT(share, 1.0);
}

TEST(TpccTest, NeedsAWarehouse) { EXPECT_THROW(Workload{tpcc(0)}, ConfigError); }

WorkloadSpec flight() {
  WorkloadSpec s;
  s.kind = WorkloadKind::kFlight;
  return s;
}

struct PhaseTally {
  std::map<AgentPhase, std::size_t> ops, writes;
  std::size_t total_ops = 0, total_writes = 0;
};

PhaseTally tally(const Workload& w, int scripts) {
  PhaseTally t;
  auto gen = w.generator(0);
  for (int i = 0; i < scripts; ++i) {
    TxnScript s = gen->next(TxnKind::kAgentic);
    for (const auto& op : s.ops) {
      ++t.ops[op.phase];
      ++t.total_ops;
      if (op.kind == OpKind::kWrite) {
        ++t.writes[op.phase];
        ++t.total_writes;
      }
    }
  }
  return t;
}

TEST(FlightTest, PhaseSharesOfOperations) {
  Workload w(flight());
  PhaseTally t = tally(w, 10'000);
  auto share = [&](AgentPhase p) { return static_cast<double>(t.ops[p]) / static_cast<double>(t.total_ops); };
  EXPECT_NEAR(share(AgentPhase::kExplore), 0.49, 0.03);
  EXPECT_NEAR(share(AgentPhase::kRefine), 0.27, 0.03);
  EXPECT_NEAR(share(AgentPhase::kCommit), 0.22, 0.03);
  EXPECT_GE(static_cast<double>(t.writes[AgentPhase::kCommit]) / static_cast<double>(t.total_writes), 0.90);
  EXPECT_EQ(t.writes[AgentPhase::kExplore], 0u);
}

TEST(FlightTest, PhasesAppearInOrder) {
  Workload w(flight());
  auto gen = w.generator(2);
  for (int i = 0; i < 1000; ++i) {
    TxnScript s = gen->next(TxnKind::kAgentic);
    ASSERT_FALSE(s.ops.empty());
    EXPECT_EQ(s.ops.front().phase, AgentPhase::kExplore);
    EXPECT_EQ(s.ops.back().phase, AgentPhase::kCommit);
    for (std::size_t j = 1; j < s.ops.size(); ++j) EXPECT_LE(s.ops[j - 1].phase, s.ops[j].phase);
  }
}

TEST(FlightTest, RefineThinksLongerThanExplore) {
  Workload w(flight());
  auto gen = w.generator(1);
  double explore = 0, refine = 0;
  std::size_t ne = 0, nr = 0;
  for (int i = 0; i < 2000; ++i) {
    TxnScript s = gen->next(TxnKind::kAgentic);
    for (std::size_t j = 1; j < s.ops.size(); ++j) {
      if (s.ops[j].phase == AgentPhase::kExplore) explore += s.ops[j].think.count(), ++ne;
      if (s.ops[j].phase == AgentPhase::kRefine) refine += s.ops[j].think.count(), ++nr;
    }
  }
  EXPECT_GT(refine / nr, 4 * explore / ne);
}

double jaccard_keys(const TxnScript& a, const TxnScript& b) {
  std::set<Key> ka, kb, both;
  for (const auto& op : a.ops) ka.insert(op.key);
  for (const auto& op : b.ops) kb.insert(op.key);
  std::size_t inter = 0;
  for (Key k : ka) inter += kb.count(k);
  return static_cast<double>(inter) / static_cast<double>(ka.size() + kb.size() - inter);
}

TEST(FlightTest, RunsOfOneIntentOverlapLessThanHalf) {
  Workload w(flight());
  auto gen = w.generator(3);
  std::map<std::uint32_t, TxnScript> last;
  double sum = 0;
  std::size_t pairs = 0;
  for (int i = 0; i < 20'000; ++i) {
    TxnScript s = gen->next(TxnKind::kAgentic);
    auto it = last.find(s.intent);
    if (it != last.end()) {
      sum += jaccard_keys(it->second, s);
      ++pairs;
    }
    last[s.intent] = s;
  }
  ASSERT_GT(pairs, 1000u);
  EXPECT_LT(sum / pairs, 0.5);
}

}  // namespace
}  // namespace atcc
