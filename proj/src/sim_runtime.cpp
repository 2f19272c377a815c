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

#include "atcc/sim_runtime.hpp"

#include <algorithm>
#include <thread>

#include "atcc/error.hpp"

namespace atcc {

namespace {

thread_local const SimRuntime* tls_runtime = nullptr;
thread_local int tls_client = -1;

// Thrown into parked clients when the run is torn down after a failure.
struct TearDown {};

}  // namespace

SimRuntime::SimRuntime(SimOptions opts) : opts_(opts), rng_(opts.seed) {}

SimRuntime::~SimRuntime() = default;

int SimRuntime::self() const { return tls_runtime == this ? tls_client : -1; }

void SimRuntime::every(Nanos period, std::function<void(Nanos)> fn) {
  if (period <= Nanos::zero()) throw ConfigError("tick period must be positive");
  tickers_.push_back(Ticker{period, period, std::move(fn)});
}

Nanos SimRuntime::horizon() const {
  std::lock_guard lk(mu_);
  return horizon_;
}

Nanos SimRuntime::now() {
  if (tick_now_ >= Nanos::zero()) return tick_now_;
  int me = self();
  if (me < 0) {
    std::lock_guard lk(mu_);
    return horizon_;
  }
  return clients_[me]->vtime;
}

void SimRuntime::bind(Parker& p) {
  int me = self();
  if (me < 0) throw InvariantViolation("SimRuntime::bind called outside a simulation client");
  p.sim_client_ = me;
}

void SimRuntime::on_operation() {
  int me = self();
  if (me < 0) return;
  Nanos cost = opts_.op_cost;
  std::unique_lock lk(mu_);
  if (opts_.op_jitter > Nanos::zero()) {
    cost += Nanos(static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(opts_.op_jitter.count() + 1)));
  }
  clients_[me]->vtime += cost;
  horizon_ = std::max(horizon_, clients_[me]->vtime);
  reschedule(lk, me, Mode::kContinue);
}

void SimRuntime::relax() {
  int me = self();
  if (me < 0) {
    std::this_thread::yield();
    return;
  }
  std::unique_lock lk(mu_);
  clients_[me]->vtime += Nanos(100);
  reschedule(lk, me, Mode::kYield);
}

void SimRuntime::park_until(Parker& p, Nanos deadline) {
  int me = self();
  if (me < 0 || p.sim_client_ != me) {
    throw InvariantViolation("park_until on a parker not bound to the calling client");
  }
  std::unique_lock lk(mu_);
  if (p.permit_) {
    p.permit_ = false;
    return;
  }
  Client& c = *clients_[me];
  if (deadline <= c.vtime) return;
  c.state = State::kBlocked;
  c.deadline = deadline;
  reschedule(lk, me, Mode::kPark);
  p.permit_ = false;
}

void SimRuntime::unpark(Parker& p) {
  std::lock_guard lk(mu_);
  p.permit_ = true;
  if (p.sim_client_ < 0 || p.sim_client_ >= static_cast<int>(clients_.size())) return;
  Client& c = *clients_[p.sim_client_];
  if (c.state != State::kBlocked) return;
  Nanos waker_time = horizon_;
  if (tick_now_ >= Nanos::zero()) {
    waker_time = tick_now_;
  } else if (int me = self(); me >= 0) {
    waker_time = clients_[me]->vtime;
  }
  c.state = State::kRunnable;
  c.deadline = Nanos::max();
  c.vtime = std::max(c.vtime, waker_time);
}

void SimRuntime::reschedule(std::unique_lock<std::mutex>& lk, int me, Mode mode) {
  for (;;) {
    int best = -1;
    Nanos best_time = Nanos::max();
    Nanos global_min = Nanos::max();
    bool any_live = false;
    for (int i = 0; i < static_cast<int>(clients_.size()); ++i) {
      const Client& c = *clients_[i];
      if (c.state == State::kDone) continue;
      any_live = true;
      Nanos t = c.state == State::kRunnable ? c.vtime : c.deadline;
      global_min = std::min(global_min, t);
      if (mode == Mode::kYield && i == me) continue;
      if (t < best_time) {
        best_time = t;
        best = i;
      }
    }
    if (!any_live) {
      current_ = -1;
      return;
    }
    if (mode == Mode::kYield && (best < 0 || best_time == Nanos::max())) {
      best = me;
      best_time = clients_[me]->vtime;
    }
    if (best < 0 || best_time == Nanos::max()) {
      torn_down_ = true;
      if (!error_) {
        error_ = std::make_exception_ptr(
            InvariantViolation("simulation stalled: every client is parked without a deadline"));
      }
      for (auto& c : clients_) c->cv.notify_all();
      if (me >= 0 && clients_[me]->state != State::kDone) throw TearDown{};
      return;
    }

    // Fire tickers that every client has reached.
    Ticker* due = nullptr;
    for (auto& t : tickers_) {
      if (t.next <= global_min && (due == nullptr || t.next < due->next)) due = &t;
    }
    if (due != nullptr) {
      Nanos at = due->next;
      due->next += due->period;
      tick_now_ = at;
      lk.unlock();
      try {
        due->fn(at);
      } catch (...) {
        lk.lock();
        tick_now_ = Nanos(-1);
        throw;
      }
      lk.lock();
      tick_now_ = Nanos(-1);
      continue;
    }

    if (mode == Mode::kContinue && clients_[me]->state == State::kRunnable &&
        clients_[me]->vtime <= best_time + opts_.quantum) {
      current_ = me;
      return;
    }
    Client& next = *clients_[best];
    if (next.state == State::kBlocked) {
      // Deadline expiry.
      next.state = State::kRunnable;
      next.vtime = std::max(next.vtime, next.deadline);
      next.deadline = Nanos::max();
    }
    horizon_ = std::max(horizon_, next.vtime);
    current_ = best;
    if (best == me) return;
    next.cv.notify_one();
    if (me >= 0 && clients_[me]->state != State::kDone) wait_for_baton(lk, me);
    return;
  }
}

void SimRuntime::wait_for_baton(std::unique_lock<std::mutex>& lk, int me) {
  clients_[me]->cv.wait(lk, [&] { return current_ == me || torn_down_; });
  if (torn_down_) throw TearDown{};
}

void SimRuntime::client_main(int me, const ClientFn& fn) {
  tls_runtime = this;
  tls_client = me;
  try {
    {
      std::unique_lock lk(mu_);
      wait_for_baton(lk, me);
    }
    fn(me);
  } catch (const TearDown&) {
  } catch (...) {
    std::lock_guard lk(mu_);
    if (!error_) error_ = std::current_exception();
    torn_down_ = true;
    for (auto& c : clients_) c->cv.notify_all();
  }
  std::unique_lock lk(mu_);
  clients_[me]->state = State::kDone;
  horizon_ = std::max(horizon_, clients_[me]->vtime);
  if (!torn_down_) {
    try {
      reschedule(lk, me, Mode::kExit);
    } catch (const TearDown&) {
    } catch (...) {
      if (!error_) error_ = std::current_exception();
      torn_down_ = true;
      for (auto& c : clients_) c->cv.notify_all();
    }
  }
  tls_runtime = nullptr;
  tls_client = -1;
}

void SimRuntime::run(std::vector<ClientFn> fns) {
  {
    std::lock_guard lk(mu_);
    if (!clients_.empty()) throw InvariantViolation("SimRuntime::run may only be called once");
    for (std::size_t i = 0; i < fns.size(); ++i) clients_.push_back(std::make_unique<Client>());
    current_ = fns.empty() ? -1 : 0;
  }
  std::vector<std::thread> threads;
  threads.reserve(fns.size());
  for (std::size_t i = 0; i < fns.size(); ++i) {
    threads.emplace_back([this, i, &fns] { client_main(static_cast<int>(i), fns[i]); });
  }
  for (auto& t : threads) t.join();
  if (error_) std::rethrow_exception(error_);
}

}  // namespace atcc
