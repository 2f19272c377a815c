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
#include <condition_variable>
#include <cstdint>
#include <mutex>

namespace atcc {

using Nanos = std::chrono::nanoseconds;

inline double to_ms(Nanos d) { return std::chrono::duration<double, std::milli>(d).count(); }

// Single-permit park/unpark slot. One per transaction context; the owning
// thread parks, any thread may unpark.
class Parker {
 public:
  Parker() = default;
  Parker(const Parker&) = delete;
  Parker& operator=(const Parker&) = delete;

 private:
  friend class RealRuntime;
  friend class SimRuntime;

  std::mutex mu_;
  std::condition_variable cv_;
  bool permit_ = false;
  // Simulation client that owns this parker, -1 when unbound.
  int sim_client_ = -1;
};

// Time, waiting, and scheduling services used by the engine. RealRuntime maps
// them onto the OS; SimRuntime runs clients under a deterministic virtual
// clock so that training and randomized checks are reproducible.
class Runtime {
 public:
  virtual ~Runtime() = default;

  // Monotonic time of the calling thread.
  virtual Nanos now() = 0;

  // Blocks until unparked or `deadline` passes. Spurious returns are allowed;
  // callers re-check their condition.
  virtual void park_until(Parker& p, Nanos deadline) = 0;
  virtual void unpark(Parker& p) = 0;

  // Binds `p` to the calling thread. Required before parking under SimRuntime.
  virtual void bind(Parker& p) { (void)p; }

  // Accounts for one unit of engine work. Scheduling point under simulation.
  virtual void on_operation() {}

  // Backoff step inside a spin-wait.
  virtual void relax() = 0;
};

class RealRuntime final : public Runtime {
 public:
  RealRuntime();

  Nanos now() override;
  void park_until(Parker& p, Nanos deadline) override;
  void unpark(Parker& p) override;
  void relax() override;

 private:
  std::chrono::steady_clock::time_point origin_;
};

}  // namespace atcc
