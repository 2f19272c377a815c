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

#include "atcc/policy/table.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "atcc/error.hpp"

namespace atcc {

namespace {

constexpr char kMagic[8] = {'A', 'T', 'C', 'C', 'P', 'O', 'L', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

thread_local int tls_blocking_depth = 0;
std::atomic<std::uint64_t> g_decide_violations{0};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}

  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw LoadError("policy table truncated");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(b_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(b_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(b_[pos_ + i])} << (8 * i);
    pos_ += 8;
    double d;
    std::memcpy(&d, &v, sizeof d);
    return d;
  }
  const char* raw(std::size_t n) {
    need(n);
    const char* p = b_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

PolicyTable::PolicyTable(BucketSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  entries_.assign(spec_.state_count(), 0);
}

void PolicyTable::set(std::uint32_t index, ActionSet a) {
  if (index >= entries_.size()) throw InvariantViolation("policy state index out of range");
  entries_[index] = a.bits();
}

std::size_t PolicyTable::non_default() const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](std::uint8_t b) { return b != 0; }));
}

std::string PolicyTable::serialize() const {
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(kNumFeatures));
  for (const auto& b : spec_.bounds) {
    put_u32(out, static_cast<std::uint32_t>(b.size()));
    for (double d : b) put_f64(out, d);
  }
  put_u32(out, static_cast<std::uint32_t>(entries_.size()));
  put_u32(out, static_cast<std::uint32_t>(non_default()));
  for (std::uint32_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i] == 0) continue;
    put_u32(out, i);
    out.push_back(static_cast<char>(entries_[i]));
  }
  return out;
}

PolicyTable PolicyTable::deserialize(const std::string& bytes, const BucketSpec& expected) {
  Reader r(bytes);
  if (std::memcmp(r.raw(sizeof kMagic), kMagic, sizeof kMagic) != 0) throw LoadError("not a policy table");
  if (std::uint32_t v = r.u32(); v != kFormatVersion) {
    throw LoadError("unsupported policy table version " + std::to_string(v));
  }
  if (r.u32() != kNumFeatures) throw LoadError("policy table feature count mismatch");
  BucketSpec spec;
  for (auto& b : spec.bounds) {
    std::uint32_t n = r.u32();
    if (n > 254) throw LoadError("policy table bucket count out of range");
    b.resize(n);
    for (double& d : b) d = r.f64();
  }
  if (!(spec == expected)) throw LoadError("policy table bucket spec differs from the configured one");
  PolicyTable t(spec);
  if (r.u32() != t.state_count()) throw LoadError("policy table state count mismatch");
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t idx = r.u32();
    std::uint8_t bits = r.u8();
    if (idx >= t.state_count() || (bits & ~ActionSet::kAllBits) != 0) throw LoadError("policy table entry out of range");
    t.entries_[idx] = bits;
  }
  if (!r.done()) throw LoadError("trailing bytes after policy table");
  return t;
}

ActionSet decide(const PolicyTable& table, const StateKey& key) {
  if (tls_blocking_depth > 0) g_decide_violations.fetch_add(1, std::memory_order_relaxed);
  return table.lookup(key);
}

PolicyTable pause_or_retry_rule(const BucketSpec& spec, ActionSet action) {
  PolicyTable t(spec);
  for (std::uint32_t i = 0; i < t.state_count(); ++i) {
    const StateKey k = key_from_index(i, spec);
    if (k.bucket[static_cast<std::size_t>(Feature::kInterval)] > 0 || k.bucket[static_cast<std::size_t>(Feature::kRetries)] > 0) {
      t.set(i, action);
    }
  }
  return t;
}

void export_table(const PolicyTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::string bytes = table.serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

PolicyTable load_table(const std::string& path, const BucketSpec& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return PolicyTable::deserialize(bytes, expected);
}

BlockingRegion::BlockingRegion() { ++tls_blocking_depth; }
BlockingRegion::~BlockingRegion() { --tls_blocking_depth; }
bool BlockingRegion::active() { return tls_blocking_depth > 0; }
std::uint64_t BlockingRegion::decide_violations() { return g_decide_violations.load(std::memory_order_relaxed); }
void BlockingRegion::reset_violations() { g_decide_violations.store(0, std::memory_order_relaxed); }

}  // namespace atcc
