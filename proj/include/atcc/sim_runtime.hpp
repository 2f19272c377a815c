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

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "atcc/runtime.hpp"

namespace atcc {

struct SimOptions {
  // Virtual time charged per engine operation.
  Nanos op_cost{2'000};
  // Extra uniformly random cost in [0, op_jitter] per operation.
  Nanos op_jitter{0};
  // A client keeps the baton while it is at most this far ahead of the next
  // pending event. Zero gives strict virtual-time order.
  Nanos quantum{50'000};
  std::uint64_t seed = 1;
};

// Deterministic scheduler. Each client runs on its own OS thread, but only the
// holder of a single baton executes; the baton always goes to the client with
// the earliest pending virtual time (ties by client index). Parking releases
// the baton, and an unparked client resumes at the waker's virtual time.
// Identical inputs therefore produce identical interleavings.
class SimRuntime final : public Runtime {
 public:
  using ClientFn = std::function<void(int client)>;

  explicit SimRuntime(SimOptions opts = {});
  ~SimRuntime() override;

  // Runs all clients to completion. Rethrows the first client exception.
  // Throws InvariantViolation if every live client parks with no deadline.
  void run(std::vector<ClientFn> clients);

  // Fires `fn(t)` at t = period, 2*period, ... once every client has reached
  // t. Must be registered before run().
  void every(Nanos period, std::function<void(Nanos)> fn);

  // Largest virtual time reached by any client.
  Nanos horizon() const;

  Nanos now() override;
  void park_until(Parker& p, Nanos deadline) override;
  void unpark(Parker& p) override;
  void bind(Parker& p) override;
  void on_operation() override;
  void relax() override;

 private:
  enum class State { kRunnable, kBlocked, kDone };
  struct Client {
    Nanos vtime{0};
    State state = State::kRunnable;
    Nanos deadline = Nanos::max();
    std::condition_variable cv;
  };
  struct Ticker {
    Nanos period;
    Nanos next;
    std::function<void(Nanos)> fn;
  };

  enum class Mode { kContinue, kPark, kYield, kExit };

  int self() const;
  // Hands the baton to the client with the earliest pending event (possibly
  // the caller) and blocks the caller until it holds the baton again.
  void reschedule(std::unique_lock<std::mutex>& lk, int me, Mode mode);
  void wait_for_baton(std::unique_lock<std::mutex>& lk, int me);
  void client_main(int me, const ClientFn& fn);

  SimOptions opts_;
  mutable std::mutex mu_;
  std::vector<std::unique_ptr<Client>> clients_;
  std::vector<Ticker> tickers_;
  int current_ = -1;
  bool torn_down_ = false;
  Nanos horizon_{0};
  Nanos tick_now_{-1};
  std::mt19937_64 rng_;
  std::exception_ptr error_;
};

}  // namespace atcc
