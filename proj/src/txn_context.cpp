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

#include "atcc/txn_context.hpp"

namespace atcc {

const char* to_string(TxnState s) {
  switch (s) {
    case TxnState::kIdle: return "idle";
    case TxnState::kRunning: return "running";
    case TxnState::kValidating: return "validating";
    case TxnState::kCommitting: return "committing";
    case TxnState::kAborted: return "aborted";
  }
  return "?";
}

const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::kNone: return "none";
    case AbortReason::kWounded: return "wounded";
    case AbortReason::kValidation: return "validation";
    case AbortReason::kEscalation: return "escalation";
    case AbortReason::kLockTimeout: return "lock_timeout";
    case AbortReason::kUser: return "user";
  }
  return "?";
}

TxnState TxnContext::state_of(std::uint64_t attempt) const {
  std::uint64_t w = state_word_.load(std::memory_order_acquire);
  if ((w >> 8) != attempt) return TxnState::kIdle;
  return static_cast<TxnState>(w & 0xff);
}

bool TxnContext::wound(std::uint64_t attempt, Runtime& rt) {
  std::uint64_t w = state_word_.load(std::memory_order_acquire);
  for (;;) {
    if ((w >> 8) != attempt) return false;
    auto s = static_cast<TxnState>(w & 0xff);
    if (s == TxnState::kAborted) return true;
    if (s != TxnState::kRunning && s != TxnState::kValidating) return false;
    if (state_word_.compare_exchange_weak(w, pack_state(attempt, TxnState::kAborted),
                                          std::memory_order_acq_rel)) {
      break;
    }
  }
  tid_.fetch_or(TransactionId::kStatusBit, std::memory_order_acq_rel);
  rt.unpark(parker_);
  return true;
}

void TxnContext::start_attempt(TransactionId tid, Priority p) {
  tid_.store(tid.raw(), std::memory_order_release);
  priority_.store(p.score, std::memory_order_release);
  std::uint64_t next = (state_word_.load(std::memory_order_relaxed) >> 8) + 1;
  state_word_.store(pack_state(next, TxnState::kRunning), std::memory_order_seq_cst);
}

bool TxnContext::transition(TxnState from, TxnState to) {
  std::uint64_t w = state_word_.load(std::memory_order_acquire);
  std::uint64_t att = w >> 8;
  if (static_cast<TxnState>(w & 0xff) != from) return false;
  if (!state_word_.compare_exchange_strong(w, pack_state(att, to), std::memory_order_seq_cst)) return false;
  if (to == TxnState::kAborted) tid_.fetch_or(TransactionId::kStatusBit, std::memory_order_acq_rel);
  return true;
}

void TxnContext::set_idle() {
  std::uint64_t att = state_word_.load(std::memory_order_relaxed) >> 8;
  state_word_.store(pack_state(att, TxnState::kIdle), std::memory_order_release);
}

void TxnContext::raise_priority(Priority p) {
  std::uint64_t cur = priority_.load(std::memory_order_relaxed);
  while (p.score > cur && !priority_.compare_exchange_weak(cur, p.score, std::memory_order_acq_rel)) {
  }
}

}  // namespace atcc
