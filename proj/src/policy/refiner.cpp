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

#include "atcc/policy/refiner.hpp"

#include <chrono>

#include "atcc/policy/qlearn.hpp"

namespace atcc {

namespace {

constexpr std::uint64_t kValid = 1u << 7;

std::uint64_t pack_mail(std::uint64_t attempt, ActionSet a) { return (attempt << 8) | kValid | a.bits(); }

}  // namespace

Refiner::Refiner(std::shared_ptr<const PolicyTable> base, RefinerOptions opts)
    : base_(std::move(base)),
      opts_(opts),
      queue_(opts.queue_capacity),
      mailbox_(std::make_unique<std::atomic<std::uint64_t>[]>(opts.max_workers)),
      working_(*base_),
      shadow_(base_) {}

Refiner::~Refiner() { stop(); }

void Refiner::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] {
    while (running_.load(std::memory_order_acquire)) {
      std::size_t before = processed();
      drain();
      if (processed() == before) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    drain();
  });
}

void Refiner::stop() {
  if (!running_.exchange(false)) return;
  if (thread_.joinable()) thread_.join();
}

bool Refiner::submit(const RefineReport& r) {
  if (queue_.try_push(r)) return true;
  dropped_.fetch_add(1, std::memory_order_relaxed);
  return false;
}

std::optional<ActionSet> Refiner::take_correction(WorkerId wid, std::uint64_t attempt) {
  if (wid >= opts_.max_workers) return std::nullopt;
  std::uint64_t m = mailbox_[wid].exchange(0, std::memory_order_acq_rel);
  if ((m & kValid) == 0) return std::nullopt;
  if ((m >> 8) != attempt) {
    stale_.fetch_add(1, std::memory_order_relaxed);
    return std::nullopt;
  }
  return ActionSet(static_cast<std::uint8_t>(m & ActionSet::kAllBits));
}

void Refiner::drain() {
  std::lock_guard lk(consumer_mu_);
  while (auto r = queue_.try_pop()) {
    process(*r);
    processed_.fetch_add(1, std::memory_order_relaxed);
  }
  if (since_publish_ > 0) publish();
}

void Refiner::process(const RefineReport& r) {
  if (r.state >= working_.state_count()) return;
  if (r.has_reward) {
    Avg& a = avg_[std::uint64_t{r.state} * 32 + r.action.bits()];
    a.value = a.n == 0 ? r.reward : a.value + opts_.ema * (r.reward - a.value);
    ++a.n;
    // Re-pick the state's entry among the lattice actions with enough data.
    ActionSet best = base_->at(r.state);
    auto base_it = avg_.find(std::uint64_t{r.state} * 32 + best.bits());
    double best_value = base_it != avg_.end() && base_it->second.n >= opts_.min_samples ? base_it->second.value : 0.0;
    bool have_best = base_it != avg_.end() && base_it->second.n >= opts_.min_samples;
    for (ActionSet cand : action_lattice()) {
      auto it = avg_.find(std::uint64_t{r.state} * 32 + cand.bits());
      if (it == avg_.end() || it->second.n < opts_.min_samples) continue;
      if (!have_best || it->second.value > best_value) {
        best = cand;
        best_value = it->second.value;
        have_best = true;
      }
    }
    if (working_.at(r.state) != best) {
      working_.set(r.state, best);
      ++since_publish_;
      if (since_publish_ >= opts_.publish_every) publish();
    }
    return;
  }
  ActionSet shadow_choice = working_.at(r.state);
  if (shadow_choice != r.action && r.wid < opts_.max_workers) {
    mailbox_[r.wid].store(pack_mail(r.attempt, shadow_choice), std::memory_order_release);
    posted_.fetch_add(1, std::memory_order_relaxed);
  }
}

void Refiner::publish() {
  auto snap = std::make_shared<const PolicyTable>(working_);
  {
    std::lock_guard lk(shadow_mu_);
    shadow_ = std::move(snap);
  }
  shadow_version_.fetch_add(1, std::memory_order_acq_rel);
  since_publish_ = 0;
}

std::shared_ptr<const PolicyTable> Refiner::shadow() const {
  std::lock_guard lk(shadow_mu_);
  return shadow_;
}

}  // namespace atcc
