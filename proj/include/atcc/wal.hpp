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

#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "atcc/row_store.hpp"

namespace atcc {

struct WalRecord {
  std::uint64_t csn = 0;
  std::vector<std::pair<Key, std::string>> writes;
};

// Append-only commit log. Each record is
//   u32 body_length | u64 csn | u32 count | count x (u64 key | u32 len | bytes)
// in little-endian order, flushed per append. Without a path the log only
// counts what it would have written.
class WriteAheadLog {
 public:
  WriteAheadLog() = default;
  // Throws IoError if the file cannot be created.
  explicit WriteAheadLog(const std::string& path);
  ~WriteAheadLog();

  WriteAheadLog(const WriteAheadLog&) = delete;
  WriteAheadLog& operator=(const WriteAheadLog&) = delete;

  // Not thread-safe; the engine serializes appends with csn assignment.
  // Throws IoError on write failure.
  template <typename Writes>
  void append(std::uint64_t csn, const Writes& writes) {
    std::string body;
    put64(body, csn);
    put32(body, static_cast<std::uint32_t>(writes.size()));
    for (const auto& w : writes) {
      put64(body, w.key);
      put32(body, static_cast<std::uint32_t>(w.payload.size()));
      body.append(w.payload);
    }
    write_body(body);
  }

  std::uint64_t records() const { return records_; }
  std::uint64_t bytes() const { return bytes_; }

  // Throws IoError or LoadError.
  static std::vector<WalRecord> read_all(const std::string& path);

 private:
  static void put32(std::string& s, std::uint32_t v);
  static void put64(std::string& s, std::uint64_t v);
  void write_body(const std::string& body);

  std::FILE* file_ = nullptr;
  std::string path_;
  std::uint64_t records_ = 0;
  std::uint64_t bytes_ = 0;
};

}  // namespace atcc
