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

#include "atcc/runtime.hpp"

#include <thread>

namespace atcc {

RealRuntime::RealRuntime() : origin_(std::chrono::steady_clock::now()) {}

Nanos RealRuntime::now() {
  return std::chrono::duration_cast<Nanos>(std::chrono::steady_clock::now() - origin_);
}

void RealRuntime::park_until(Parker& p, Nanos deadline) {
  std::unique_lock lk(p.mu_);
  if (!p.permit_) {
    p.cv_.wait_until(lk, origin_ + deadline, [&] { return p.permit_; });
  }
  p.permit_ = false;
}

void RealRuntime::unpark(Parker& p) {
  {
    std::lock_guard lk(p.mu_);
    p.permit_ = true;
  }
  p.cv_.notify_one();
}

void RealRuntime::relax() { std::this_thread::yield(); }

}  // namespace atcc
