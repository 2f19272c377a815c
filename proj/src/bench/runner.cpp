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

#include "atcc/bench/runner.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <latch>
#include <spdlog/spdlog.h>
#include <thread>

#include "atcc/error.hpp"
#include "atcc/policy/table.hpp"
#include "atcc/sim_runtime.hpp"

namespace atcc {

PolicySetup make_policy(const BenchConfig& cfg) {
  PolicySetup p;
  if (cfg.protocol != Protocol::kAtcc) return p;
  if (cfg.policy_table.empty()) {
    p.table = std::make_shared<const PolicyTable>(cfg.buckets);
  } else {
    p.table = std::make_shared<const PolicyTable>(load_table(cfg.policy_table, cfg.buckets));
  }
  if (cfg.refine) {
    RefinerOptions ro;
    ro.max_workers = std::max<std::size_t>(cfg.threads, 1);
    p.refiner = std::make_unique<Refiner>(p.table, ro);
  }
  p.decider = std::make_unique<TableDecider>(p.table, p.refiner.get(), cfg.reward);
  return p;
}

namespace {

constexpr Nanos kTick = std::chrono::milliseconds(100);
constexpr int kTicksPerWindow = 10;

// Per-worker accumulators. Counters are written by their worker only and
// read by the coordinator; latency samples are read after the workers stop.
struct alignas(64) WorkerAcc {
  std::array<std::atomic<std::uint64_t>, 2> commits{};
  std::array<std::atomic<std::uint64_t>, 2> aborts{};
  std::atomic<std::uint64_t> latency_us_sum{0};
  std::atomic<std::uint64_t> window_max_us{0};
  std::array<std::uint64_t, 2> ops{};
  std::array<std::vector<double>, 2> latency_ms;

  static void add(std::atomic<std::uint64_t>& c, std::uint64_t v) {
    c.store(c.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
  }
};

struct Totals {
  std::array<std::uint64_t, 2> commits{};
  std::array<std::uint64_t, 2> aborts{};
  std::uint64_t latency_us_sum = 0;
  Nanos at{0};

  std::uint64_t all_commits() const { return commits[0] + commits[1]; }
  std::uint64_t all_aborts() const { return aborts[0] + aborts[1]; }
};

class Coordinator {
 public:
  Coordinator(std::vector<std::unique_ptr<WorkerAcc>>& accs, Engine& engine, RowStore& store, const BenchConfig& cfg)
      : accs_(accs), engine_(engine), store_(store), cfg_(cfg) {
    history_.push_back(Totals{});
  }

  void tick(Nanos now) {
    Totals t = totals(now);
    history_.push_back(t);
    while (history_.size() > 1 && now - history_.front().at > std::chrono::seconds(1)) history_.pop_front();
    const Totals& old = history_.front();
    const double dt = std::max(1e-9, std::chrono::duration<double>(t.at - old.at).count());
    const std::uint64_t dc = t.all_commits() - old.all_commits();
    const std::uint64_t da = t.all_aborts() - old.all_aborts();
    std::uint64_t max_us = 0;
    for (auto& a : accs_) max_us = std::max(max_us, a->window_max_us.exchange(0, std::memory_order_relaxed));
    tail_ms_ = std::max(tail_ms_ * 0.9, static_cast<double>(max_us) / 1e3);

    const double queue = static_cast<double>(engine_.locks().waiting_count());
    queue_sum_ += queue;
    queue_all_ += queue;
    ++queue_n_;
    ++queue_all_n_;

    GlobalMetrics g;
    g.tps = static_cast<double>(dc) / dt;
    g.abort_rate = dc + da == 0 ? 0.0 : static_cast<double>(da) / static_cast<double>(dc + da);
    g.avg_latency_ms = dc == 0 ? 0.0 : static_cast<double>(t.latency_us_sum - old.latency_us_sum) / 1e3 / static_cast<double>(dc);
    g.tail_latency_ms = tail_ms_;
    g.lock_queue_len = queue;
    engine_.metrics().publish(g);

    if (++ticks_ % kTicksPerWindow == 0) {
      close_window(t);
      store_.update_hot_flags(cfg_.hot_fraction, cfg_.hot_min_accesses);
    }
  }

  // Closes the trailing partial window, if any time is left in the run.
  void finish(Nanos end) {
    const double end_s = std::chrono::duration<double>(end).count();
    while (static_cast<double>(windows_.size()) + 1e-9 < end_s) {
      Totals t = totals(end);
      close_window(t, std::min(end_s, static_cast<double>(windows_.size() + 1)));
    }
  }

  std::vector<WindowRow> windows() const { return windows_; }
  double mean_queue() const { return queue_all_n_ == 0 ? 0.0 : queue_all_ / static_cast<double>(queue_all_n_); }

 private:
  Totals totals(Nanos now) const {
    Totals t;
    t.at = now;
    for (auto& a : accs_) {
      for (int k = 0; k < 2; ++k) {
        t.commits[k] += a->commits[k].load(std::memory_order_relaxed);
        t.aborts[k] += a->aborts[k].load(std::memory_order_relaxed);
      }
      t.latency_us_sum += a->latency_us_sum.load(std::memory_order_relaxed);
    }
    return t;
  }

  void close_window(const Totals& t, double t_end_s = -1) {
    WindowRow w;
    w.index = static_cast<std::uint32_t>(windows_.size());
    w.t_end_s = t_end_s >= 0 ? t_end_s : static_cast<double>(w.index + 1);
    const double span = w.t_end_s - static_cast<double>(w.index);
    w.agentic_commits = t.commits[0] - last_.commits[0];
    w.background_commits = t.commits[1] - last_.commits[1];
    w.agentic_aborts = t.aborts[0] - last_.aborts[0];
    w.background_aborts = t.aborts[1] - last_.aborts[1];
    const std::uint64_t c = w.agentic_commits + w.background_commits;
    const std::uint64_t a = w.agentic_aborts + w.background_aborts;
    w.tps = span > 0 ? static_cast<double>(c) / span : 0.0;
    w.abort_rate = c + a == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(c + a);
    w.mean_lock_queue_len = queue_n_ == 0 ? 0.0 : queue_sum_ / static_cast<double>(queue_n_);
    queue_sum_ = 0;
    queue_n_ = 0;
    windows_.push_back(w);
    last_ = t;
  }

  std::vector<std::unique_ptr<WorkerAcc>>& accs_;
  Engine& engine_;
  RowStore& store_;
  const BenchConfig& cfg_;
  std::deque<Totals> history_;
  Totals last_;
  std::vector<WindowRow> windows_;
  std::uint64_t ticks_ = 0;
  double tail_ms_ = 0;
  double queue_sum_ = 0;
  std::uint64_t queue_n_ = 0;
  double queue_all_ = 0;
  std::uint64_t queue_all_n_ = 0;
};

void pin_current_thread(std::size_t index) {
  static std::atomic<bool> warned{false};
  const unsigned cpus = std::max(1u, std::thread::hardware_concurrency());
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(index % cpus, &set);
  if (pthread_setaffinity_np(pthread_self(), sizeof set, &set) != 0 && !warned.exchange(true)) {
    spdlog::warn("thread pinning failed; workers run unpinned");
  }
}

// Sleeps until `until` or an earlier unpark; loops over spurious returns.
void pause_until(Runtime& rt, Parker& p, Nanos until) {
  while (rt.now() < until) rt.park_until(p, until);
}

struct WorkerEnv {
  const BenchConfig& cfg;
  const Workload& workload;
  Runtime& rt;
  Nanos end;
};

void worker_loop(const WorkerEnv& env, Session& s, WorkerAcc& acc, std::size_t index) {
  const BenchConfig& cfg = env.cfg;
  Runtime& rt = env.rt;
  auto gen = env.workload.generator(static_cast<std::uint32_t>(index), cfg.seed);
  Rng rng(derive_seed(cfg.seed, 0x10000 + index));
  const TxnKind kind = worker_kind(index, cfg.threads, cfg.workload.agentic_fraction);
  const int k = static_cast<int>(kind);
  std::uint64_t stamp = static_cast<std::uint64_t>(index) << 40;

  while (rt.now() < env.end) {
    TxnScript script = gen->next(kind);
    const Nanos t0 = rt.now();
    s.begin(kind);
    for (;;) {
      bool ok = true;
      for (const ScriptOp& op : script.ops) {
        if (op.think.count() > 0 && s.think(op.think) != Status::kOk) {
          ok = false;
          break;
        }
        Status st = op.kind == OpKind::kRead ? s.read(op.key) : s.write(op.key, make_payload(op.key, ++stamp));
        if (st != Status::kOk) {
          ok = false;
          break;
        }
      }
      if (ok && s.commit() == Status::kOk) {
        const Nanos t1 = rt.now();
        if (t1 <= env.end) {
          const auto us = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count());
          WorkerAcc::add(acc.commits[k], 1);
          WorkerAcc::add(acc.latency_us_sum, us);
          if (us > acc.window_max_us.load(std::memory_order_relaxed)) acc.window_max_us.store(us, std::memory_order_relaxed);
          acc.ops[k] += script.ops.size();
          acc.latency_ms[k].push_back(to_ms(t1 - t0));
        }
        break;
      }
      if (s.active()) s.abort();
      if (rt.now() <= env.end) WorkerAcc::add(acc.aborts[k], 1);
      pause_until(rt, s.ctx().parker(), std::min(rt.now() + retry_backoff(cfg.workload.delays, kind, rng), env.end));
      if (rt.now() >= env.end) break;
      s.restart();
    }
  }
}

ClassMetrics class_metrics(std::uint64_t commits, std::uint64_t aborts, std::uint64_t ops, std::vector<double> lat,
                           double duration_s, double omega) {
  ClassMetrics c;
  c.commits = commits;
  c.aborts = aborts;
  c.throughput_tps = duration_s > 0 ? static_cast<double>(commits) / duration_s : 0.0;
  c.abort_rate = commits + aborts == 0 ? 0.0 : static_cast<double>(aborts) / static_cast<double>(commits + aborts);
  c.mean_ops = commits == 0 ? 0.0 : static_cast<double>(ops) / static_cast<double>(commits);
  c.t_avg = token_cost(c.mean_ops, c.abort_rate, omega);
  c.latency = summarize_latency(std::move(lat));
  return c;
}

}  // namespace

BenchRunner::BenchRunner(const BenchConfig& cfg) : base_(cfg) {
  base_.validate();
  WorkloadSpec spec = cfg.workload;
  spec.seed = cfg.seed;
  workload_ = std::make_unique<Workload>(spec);
  store_ = std::make_unique<RowStore>(workload_->key_count(), kPayloadBytes);
  workload_->load(*store_);
}

BenchRunner::~BenchRunner() = default;

RunResult BenchRunner::run(const BenchConfig& cfg, Decider* decider_override) {
  cfg.validate();
  {
    WorkloadSpec spec = cfg.workload;
    spec.seed = cfg.seed;
    if (Workload(spec).key_count() != workload_->key_count()) throw ConfigError("run config changes the table layout");
  }
  store_->reset_hot_flags();
  store_->reset_versions();

  PolicySetup policy = decider_override == nullptr ? make_policy(cfg) : PolicySetup{};
  Decider* decider = decider_override != nullptr ? decider_override : policy.decider.get();
  if (policy.refiner) policy.refiner->start();

  std::unique_ptr<Runtime> rt;
  SimRuntime* sim = nullptr;
  if (cfg.runtime == RuntimeKind::kSim) {
    SimOptions so;
    so.seed = derive_seed(cfg.seed, 0xC0FFEE);
    auto s = std::make_unique<SimRuntime>(so);
    sim = s.get();
    rt = std::move(s);
  } else {
    rt = std::make_unique<RealRuntime>();
  }

  Engine engine(*store_, *rt, cfg.engine_options(cfg.threads), cfg.protocol == Protocol::kAtcc ? decider : nullptr);
  std::vector<std::unique_ptr<WorkerAcc>> accs;
  std::vector<Session> sessions;
  sessions.reserve(cfg.threads);
  for (std::size_t i = 0; i < cfg.threads; ++i) {
    accs.push_back(std::make_unique<WorkerAcc>());
    sessions.push_back(engine.open_session());
  }
  Coordinator coord(accs, engine, *store_, cfg);
  const std::uint64_t violations_before = BlockingRegion::decide_violations();
  const auto duration = Nanos(static_cast<std::int64_t>(std::llround(cfg.duration_s * 1e9)));
  Nanos start{0};

  if (sim != nullptr) {
    WorkerEnv env{cfg, *workload_, *rt, duration};
    sim->every(kTick, [&](Nanos t) {
      if (t <= duration) coord.tick(t);
    });
    std::vector<SimRuntime::ClientFn> clients;
    for (std::size_t i = 0; i < cfg.threads; ++i) {
      clients.push_back([&, i](int) { worker_loop(env, sessions[i], *accs[i], i); });
    }
    sim->run(std::move(clients));
    coord.finish(duration);
  } else {
    start = rt->now();
    WorkerEnv env{cfg, *workload_, *rt, start + duration};
    std::latch ready(static_cast<std::ptrdiff_t>(cfg.threads) + 1);
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < cfg.threads; ++i) {
      workers.emplace_back([&, i] {
        if (cfg.pin_threads) pin_current_thread(i);
        ready.arrive_and_wait();
        worker_loop(env, sessions[i], *accs[i], i);
      });
    }
    std::atomic<bool> stop{false};
    ready.arrive_and_wait();
    std::thread coordinator([&] {
      Parker p;
      for (int n = 1;; ++n) {
        const Nanos at = start + kTick * n;
        if (at > start + duration) break;
        while (!stop.load() && rt->now() < at) rt->park_until(p, at);
        if (stop.load()) break;
        coord.tick(at - start);
      }
    });
    for (auto& w : workers) w.join();
    stop.store(true);
    coordinator.join();
    coord.finish(duration);
  }
  if (policy.refiner) policy.refiner->stop();

  RunResult out;
  out.counters = engine.counters();
  MetricsReport& r = out.report;
  r.protocol = to_string(cfg.protocol);
  r.workload = to_string(cfg.workload.kind);
  r.contention = to_string(cfg.workload.contention);
  r.runtime = cfg.runtime == RuntimeKind::kSim ? "sim" : "real";
  r.threads = cfg.threads;
  r.duration_s = cfg.duration_s;
  r.seed = cfg.seed;
  r.omega = cfg.omega;
  r.backoff_scale = cfg.workload.delays.backoff_scale;

  std::array<std::uint64_t, 2> commits{}, aborts{}, ops{};
  std::array<std::vector<double>, 2> lat;
  for (auto& a : accs) {
    for (int k = 0; k < 2; ++k) {
      commits[k] += a->commits[k].load();
      aborts[k] += a->aborts[k].load();
      ops[k] += a->ops[k];
      lat[k].insert(lat[k].end(), a->latency_ms[k].begin(), a->latency_ms[k].end());
    }
  }
  std::vector<double> all = lat[0];
  all.insert(all.end(), lat[1].begin(), lat[1].end());
  r.agentic = class_metrics(commits[0], aborts[0], ops[0], std::move(lat[0]), cfg.duration_s, cfg.omega);
  r.background = class_metrics(commits[1], aborts[1], ops[1], std::move(lat[1]), cfg.duration_s, cfg.omega);
  r.total = class_metrics(commits[0] + commits[1], aborts[0] + aborts[1], ops[0] + ops[1], std::move(all), cfg.duration_s,
                          cfg.omega);
  r.mean_lock_queue_len = coord.mean_queue();
  for (std::size_t b = 0; b < out.counters.decisions.size(); ++b) {
    if (out.counters.decisions[b] != 0) r.decisions[ActionSet(static_cast<std::uint8_t>(b)).to_string()] = out.counters.decisions[b];
  }
  for (int k = 0; k < 2; ++k) {
    for (std::size_t i = 1; i < out.counters.aborts_by_reason[k].size(); ++i) {
      if (out.counters.aborts_by_reason[k][i] != 0) {
        r.aborts_by_reason[std::string(k == 0 ? "agentic." : "background.") + to_string(static_cast<AbortReason>(i))] =
            out.counters.aborts_by_reason[k][i];
      }
    }
  }
  r.boosts = out.counters.boosts;
  r.escalations = out.counters.escalations;
  r.lock_timeouts = engine.locks().timeouts();
  r.decide_in_blocking = BlockingRegion::decide_violations() - violations_before;
  r.refine_dropped = policy.refiner ? policy.refiner->dropped() : 0;
  r.windows = coord.windows();

  if (cfg.verify && engine.history() != nullptr) {
    out.history = engine.history()->events();
    out.verdict = check_history(out.history);
    if (!cfg.history_path.empty()) {
      std::ofstream hs(cfg.history_path, std::ios::trunc);
      if (!hs) throw IoError("cannot open " + cfg.history_path);
      History::write_lines(hs, out.history);
    }
  }
  sessions.clear();
  return out;
}

}  // namespace atcc
