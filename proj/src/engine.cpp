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

#include "atcc/engine.hpp"

#include <algorithm>

#include "atcc/error.hpp"

namespace atcc {

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::kOcc: return "occ";
    case Protocol::kWoundWait: return "wound_wait";
    case Protocol::kAtcc: return "atcc";
  }
  return "?";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "occ") return Protocol::kOcc;
  if (text == "wound_wait" || text == "ww") return Protocol::kWoundWait;
  if (text == "atcc") return Protocol::kAtcc;
  throw ConfigError("unknown protocol '" + std::string(text) + "'");
}

Engine::Engine(RowStore& store, Runtime& rt, EngineOptions opts, Decider* decider)
    : store_(store),
      rt_(rt),
      opts_(std::move(opts)),
      decider_(decider),
      locks_(store, rt, opts_.locks) {
  opts_.priority.validate();
  opts_.buckets.validate();
  if (opts_.max_workers == 0 || opts_.max_workers > TransactionId::kWidMask) {
    throw ConfigError("max_workers must be in [1, 65535]");
  }
  if (opts_.policy_every_k == 0) throw ConfigError("policy cadence must be at least 1");
  if (opts_.record_history) history_ = std::make_unique<History>();
  wal_ = opts_.wal_path.empty() ? std::make_unique<WriteAheadLog>() : std::make_unique<WriteAheadLog>(opts_.wal_path);
  slots_.reserve(opts_.max_workers);
  for (std::size_t i = 0; i < opts_.max_workers; ++i) slots_.push_back(std::make_unique<Slot>(static_cast<WorkerId>(i)));
  locks_.set_slice_hook([this](TxnContext& ctx, Nanos waited) { slice_hook(ctx, waited); });
}

Engine::~Engine() = default;

Session Engine::open_session() {
  for (auto& s : slots_) {
    bool expected = false;
    if (s->in_use.compare_exchange_strong(expected, true, std::memory_order_acq_rel)) return Session(*this, s->ctx);
  }
  throw AdmissionError("no free worker slot (max_workers=" + std::to_string(opts_.max_workers) + ")");
}

void Engine::release_slot(WorkerId wid) { slots_[wid]->in_use.store(false, std::memory_order_release); }

TxnContext* Engine::context(WorkerId wid) { return wid < slots_.size() ? &slots_[wid]->ctx : nullptr; }

void Engine::boost_priority(TxnContext& ctx, Priority p) {
  ctx.raise_priority(p);
  bump(slot_of(ctx).boosts);
  locks_.reevaluate_pending(ctx);
}

void Engine::slice_hook(TxnContext& ctx, Nanos waited) {
  if (!ctx.dynamic_priority) return;
  const TxnStats& s = ctx.stats;
  Priority p = compute_priority(
      PriorityInputs{static_cast<double>(s.sql_count), s.blocked_ms + to_ms(waited),
                     static_cast<double>(s.retry_count), s.interval_ms_total},
      opts_.priority);
  if (p > ctx.priority()) boost_priority(ctx, p);
}

EngineCounters Engine::counters() const {
  EngineCounters c;
  for (const auto& s : slots_) {
    for (int k = 0; k < 2; ++k) {
      c.commits[k] += s->commits[k].load(std::memory_order_relaxed);
      c.aborts[k] += s->aborts[k].load(std::memory_order_relaxed);
    }
    for (int k = 0; k < 2; ++k) {
      for (std::size_t r = 0; r < c.aborts_by_reason[k].size(); ++r) {
        c.aborts_by_reason[k][r] += s->aborts_by_reason[k][r].load(std::memory_order_relaxed);
      }
    }
    for (std::size_t a = 0; a < c.decisions.size(); ++a) c.decisions[a] += s->decisions[a].load(std::memory_order_relaxed);
    c.boosts += s->boosts.load(std::memory_order_relaxed);
    c.escalations += s->escalations.load(std::memory_order_relaxed);
  }
  return c;
}

void Engine::record(EventType type, const TxnContext& ctx, Key key, Version version, std::uint64_t csn) {
  if (!history_) return;
  history_->append(HistoryEvent{type, ctx.serial, ctx.tid().with_status(TxnStatus::kRunning), key, version, csn,
                                rt_.now().count()});
}

bool Engine::owner_in_commit(const Row& row, TransactionId me) {
  std::uint64_t lw = row.lock_word.load(std::memory_order_acquire);
  std::uint64_t owner = lw & ~Row::kCommittingBit;
  if (owner == Row::kFree || owner == me.order_key()) return false;
  if ((lw & Row::kCommittingBit) != 0) return true;
  TxnContext* o = context(static_cast<WorkerId>(owner & TransactionId::kWidMask));
  if (o == nullptr || o->tid().order_key() != owner) return false;
  TxnState s = o->state();
  return s == TxnState::kValidating || s == TxnState::kCommitting;
}

// ---------------------------------------------------------------- Session

Session::Session(Session&& o) noexcept
    : eng_(o.eng_), ctx_(o.ctx_), phase_(o.phase_), kind_(o.kind_), start_ts_(o.start_ts_),
      last_policy_at_(o.last_policy_at_) {
  o.eng_ = nullptr;
  o.ctx_ = nullptr;
}

Session::~Session() {
  if (eng_ == nullptr) return;
  if (phase_ == Phase::kActive) abort();
  ctx_->set_idle();
  eng_->release_slot(ctx_->wid());
}

void Session::start_attempt(std::uint64_t start_ts, std::uint64_t retry_count) {
  if (phase_ == Phase::kActive) throw InvariantViolation("begin while a transaction is active");
  Engine& e = *eng_;
  TxnContext& c = *ctx_;
  e.runtime().bind(c.parker());
  start_ts_ = start_ts;
  c.kind = kind_;
  c.rs.clear();
  c.rs_index.clear();
  c.ws.clear();
  c.ws_index.clear();
  c.lock_keys.clear();
  c.decisions.clear();
  c.stats = TxnStats{};
  c.stats.retry_count = retry_count;
  c.abort_reason = AbortReason::kNone;
  c.dynamic_priority = false;
  c.action = e.protocol() == Protocol::kWoundWait ? (ActionSet(Action::kLockFullRead) | Action::kLockFullWrite)
                                                  : kRemainOcc;
  Priority p{0};
  if (e.protocol() == Protocol::kAtcc) {
    p = compute_priority(PriorityInputs{0, 0, static_cast<double>(retry_count), 0}, e.options().priority);
  }
  c.serial = e.next_serial();
  c.start_attempt(TransactionId::pack(c.wid(), start_ts, TxnStatus::kRunning), p);
  c.stats.last_op_end = e.runtime().now();
  last_policy_at_ = kNoDecision;
  phase_ = Phase::kActive;
  e.record(EventType::kBegin, c);
}

void Session::begin(TxnKind kind) {
  kind_ = kind;
  ctx_->first_begin = eng_->runtime().now();
  start_attempt(eng_->next_start_ts(), 0);
}

void Session::restart() {
  if (phase_ != Phase::kAborted) throw InvariantViolation("restart without an aborted attempt");
  start_attempt(start_ts_, ctx_->stats.retry_count + 1);
}

void Session::recompute_priority() {
  const TxnStats& s = ctx_->stats;
  Priority p = compute_priority(PriorityInputs{static_cast<double>(s.sql_count), s.blocked_ms,
                                               static_cast<double>(s.retry_count), s.interval_ms_total},
                                eng_->options().priority);
  if (p > ctx_->priority()) eng_->boost_priority(*ctx_, p);
}

Status Session::fail(AbortReason reason) {
  cleanup_abort(reason);
  return Status::kAborted;
}

void Session::cleanup_abort(AbortReason reason) {
  if (phase_ != Phase::kActive) return;
  TxnContext& c = *ctx_;
  Engine& e = *eng_;
  bool self_inflicted = c.transition(TxnState::kRunning, TxnState::kAborted) ||
                        c.transition(TxnState::kValidating, TxnState::kAborted) ||
                        c.transition(TxnState::kCommitting, TxnState::kAborted);
  if (c.abort_reason == AbortReason::kNone) c.abort_reason = self_inflicted ? reason : AbortReason::kWounded;
  e.locks().release_and_handover(c);
  e.record(EventType::kAbort, c);
  Engine::Slot& slot = e.slot_of(c);
  Engine::bump(slot.aborts[static_cast<int>(kind_)]);
  Engine::bump(slot.aborts_by_reason[static_cast<int>(kind_)][static_cast<std::size_t>(c.abort_reason)]);
  if (e.decider() != nullptr && e.protocol() == Protocol::kAtcc) {
    e.decider()->on_outcome(c, Outcome::kAbort, e.metrics().read());
  }
  c.rs.clear();
  c.rs_index.clear();
  c.ws.clear();
  c.ws_index.clear();
  phase_ = Phase::kAborted;
}

void Session::abort() {
  if (phase_ != Phase::kActive) return;
  cleanup_abort(AbortReason::kUser);
}

bool Session::enter_op() {
  if (phase_ != Phase::kActive) return false;
  TxnContext& c = *ctx_;
  if (c.state() != TxnState::kRunning) {
    cleanup_abort(AbortReason::kWounded);
    return false;
  }
  Runtime& rt = eng_->runtime();
  rt.on_operation();
  Nanos now = rt.now();
  if (c.stats.sql_count > 0) {
    double gap = std::max(0.0, to_ms(now - c.stats.last_op_end));
    c.stats.interval_ms_total += gap;
    c.stats.last_interval_ms = gap;
  }
  if (maybe_invoke_policy() != Status::kOk) return false;
  if (c.state() != TxnState::kRunning) {
    cleanup_abort(AbortReason::kWounded);
    return false;
  }
  return true;
}

void Session::finish_op(Key key, bool hot, bool is_write) {
  TxnStats& s = ctx_->stats;
  ++s.sql_count;
  if (hot) ++s.hot_accesses;
  if (is_write) {
    ++s.consecutive_writes;
  } else {
    s.consecutive_writes = 0;
    s.round_keys.insert(key);
  }
  s.last_op_end = eng_->runtime().now();
}

Status Session::maybe_invoke_policy() {
  Engine& e = *eng_;
  TxnContext& c = *ctx_;
  if (e.protocol() != Protocol::kAtcc) return Status::kOk;
  const std::uint64_t n = c.stats.sql_count;
  if (n % e.options().policy_every_k != 0 || last_policy_at_ == n) return Status::kOk;
  last_policy_at_ = n;

  GlobalMetrics g = e.metrics().read();
  g.lock_queue_len = static_cast<double>(e.locks().waiting_count());
  FeatureVector fv = extract_features(c.stats, c.rs.size(), c.ws.size(), e.runtime().now(), g);
  StateKey key = discretize(fv, e.options().buckets);
  ActionSet chosen = e.decider() != nullptr ? e.decider()->decide(c, key) : kRemainOcc;
  c.decisions.push_back(DecisionRecord{key, chosen, g, n, fv.interval_ms});
  close_round(c.stats, c.rs.size(), c.ws.size());
  Engine::bump(e.slot_of(c).decisions[chosen.bits()]);

  ActionSet scope(static_cast<std::uint8_t>(chosen.bits() & 15));
  if (!c.action.covers(scope)) {
    if (apply_action_change(scope) != Status::kOk) return Status::kAborted;
  }
  if (chosen.has(Action::kPrioritize)) {
    c.action = c.action | Action::kPrioritize;
    c.dynamic_priority = true;
    recompute_priority();
  }
  return Status::kOk;
}

Status Session::lock_read_entry(ReadEntry& e) {
  TxnContext& c = *ctx_;
  c.lock_keys.push_back(e.key);
  if (eng_->locks().rlock(e.key, c) != LockResult::kGranted) return fail(AbortReason::kWounded);
  e.locked = true;
  // Holding the read lock, no writer can be committing on this row.
  if (eng_->store().current_version(e.key) != e.version) return fail(AbortReason::kEscalation);
  return Status::kOk;
}

Status Session::apply_action_change(ActionSet next) {
  if (phase_ != Phase::kActive) return Status::kAborted;
  TxnContext& c = *ctx_;
  if (c.state() != TxnState::kRunning) return fail(AbortReason::kWounded);
  ActionSet target = c.action | next;
  if (target == c.action) return Status::kOk;
  Engine::bump(eng_->slot_of(c).escalations);
  for (ReadEntry& e : c.rs) {
    if (e.locked || !target.locks_read(e.hot)) continue;
    if (lock_read_entry(e) != Status::kOk) return Status::kAborted;
  }
  for (WriteEntry& w : c.ws) {
    if (w.locked || !target.locks_write(w.hot)) continue;
    c.lock_keys.push_back(w.key);
    if (eng_->locks().wlock(w.key, c) != LockResult::kGranted) return fail(AbortReason::kWounded);
    w.locked = true;
  }
  c.action = target;
  return Status::kOk;
}

Status Session::read(Key key, std::string* out) {
  Engine& e = *eng_;
  Row& row = e.store().row(key);
  if (!enter_op()) return Status::kAborted;
  TxnContext& c = *ctx_;
  const bool hot = row.hot.load(std::memory_order_relaxed);
  e.store().note_access(key, false);

  if (auto w = c.ws_index.find(key); w != c.ws_index.end()) {
    if (out != nullptr) *out = c.ws[w->second].payload;
    finish_op(key, hot, false);
    return Status::kOk;
  }

  auto r = c.rs_index.find(key);
  const bool want_lock = c.action.locks_read(hot);
  if (r != c.rs_index.end()) {
    ReadEntry& entry = c.rs[r->second];
    if (want_lock && !entry.locked && lock_read_entry(entry) != Status::kOk) return Status::kAborted;
  } else if (want_lock) {
    c.lock_keys.push_back(key);
    if (e.locks().rlock(key, c) != LockResult::kGranted) return fail(AbortReason::kWounded);
  }

  RowSnapshot snap = e.store().read_latest_committed(key, e.runtime());
  if (r == c.rs_index.end()) {
    c.rs_index.emplace(key, c.rs.size());
    c.rs.push_back(ReadEntry{key, snap.version, hot, want_lock});
  }
  e.record(EventType::kRead, c, key, snap.version);
  if (out != nullptr) *out = std::move(snap.payload);
  finish_op(key, hot, false);
  return Status::kOk;
}

Status Session::write(Key key, std::string_view payload) {
  Engine& e = *eng_;
  Row& row = e.store().row(key);
  if (payload.size() > e.store().payload_capacity()) {
    throw InvariantViolation("payload of " + std::to_string(payload.size()) + " bytes exceeds row capacity");
  }
  if (!enter_op()) return Status::kAborted;
  TxnContext& c = *ctx_;
  const bool hot = row.hot.load(std::memory_order_relaxed);
  e.store().note_access(key, true);

  auto w = c.ws_index.find(key);
  const bool have_lock = w != c.ws_index.end() && c.ws[w->second].locked;
  const bool want_lock = c.action.locks_write(hot);
  if (want_lock && !have_lock) {
    c.lock_keys.push_back(key);
    if (e.locks().wlock(key, c) != LockResult::kGranted) return fail(AbortReason::kWounded);
  }
  if (w != c.ws_index.end()) {
    c.ws[w->second].payload.assign(payload);
    c.ws[w->second].locked = c.ws[w->second].locked || want_lock;
  } else {
    c.ws_index.emplace(key, c.ws.size());
    c.ws.push_back(WriteEntry{key, std::string(payload), hot, want_lock});
  }
  finish_op(key, hot, true);
  return Status::kOk;
}

Status Session::think(Nanos duration) {
  if (phase_ != Phase::kActive) return Status::kAborted;
  TxnContext& c = *ctx_;
  Runtime& rt = eng_->runtime();
  const Nanos deadline = rt.now() + duration;
  {
    BlockingRegion blocking;
    while (c.state() == TxnState::kRunning) {
      if (rt.now() >= deadline) break;
      rt.park_until(c.parker(), deadline);
    }
  }
  if (c.state() != TxnState::kRunning) return fail(AbortReason::kWounded);
  return Status::kOk;
}

Status Session::commit(Version* csn_out) {
  if (phase_ != Phase::kActive) return Status::kAborted;
  Engine& e = *eng_;
  TxnContext& c = *ctx_;
  RowStore& store = e.store();
  if (c.state() != TxnState::kRunning) return fail(AbortReason::kWounded);
  e.runtime().on_operation();

  // Phase 1: write locks in key order.
  std::vector<std::size_t> order(c.ws.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.ws[a].key < c.ws[b].key; });
  for (std::size_t i : order) {
    WriteEntry& w = c.ws[i];
    if (w.locked) continue;
    c.lock_keys.push_back(w.key);
    if (e.locks().wlock(w.key, c) != LockResult::kGranted) return fail(AbortReason::kWounded);
    w.locked = true;
  }
  if (!c.transition(TxnState::kRunning, TxnState::kValidating)) return fail(AbortReason::kWounded);

  // Phase 2: read validation.
  const TransactionId me = c.tid();
  for (const ReadEntry& r : c.rs) {
    if (r.locked) continue;
    const Row& row = store.row(r.key);
    if (e.owner_in_commit(row, me)) return fail(AbortReason::kValidation);
    while (row.committing() && (row.lock_word.load(std::memory_order_acquire) & ~Row::kCommittingBit) != me.order_key()) {
      e.runtime().relax();
    }
    if (row.version.load(std::memory_order_acquire) != r.version) return fail(AbortReason::kValidation);
  }

  // Phase 3: no longer preemptible.
  if (!c.transition(TxnState::kValidating, TxnState::kCommitting)) return fail(AbortReason::kWounded);
  for (std::size_t i : order) store.set_committing(c.ws[i].key, me);

  // Phase 4: csn, log, install, hand over.
  Version csn = 0;
  {
    std::lock_guard lk(e.commit_mu_);
    csn = e.csn_.load(std::memory_order_relaxed) + 1;
    if (!c.ws.empty()) {
      try {
        e.wal_->append(csn, c.ws);
      } catch (...) {
        for (std::size_t i : order) store.clear_committing(c.ws[i].key);
        cleanup_abort(AbortReason::kUser);
        throw;
      }
    }
    e.csn_.store(csn, std::memory_order_release);
    for (std::size_t i : order) e.record(EventType::kWrite, c, c.ws[i].key, csn);
    e.record(EventType::kCommit, c, 0, 0, csn);
  }
  for (std::size_t i : order) store.install_version(c.ws[i].key, c.ws[i].payload, csn);
  e.locks().release_and_handover(c);

  Engine::bump(e.slot_of(c).commits[static_cast<int>(kind_)]);
  if (e.decider() != nullptr && e.protocol() == Protocol::kAtcc) {
    e.decider()->on_outcome(c, Outcome::kCommit, e.metrics().read());
  }
  c.set_idle();
  phase_ = Phase::kCommitted;
  if (csn_out != nullptr) *csn_out = csn;
  return Status::kOk;
}

}  // namespace atcc
