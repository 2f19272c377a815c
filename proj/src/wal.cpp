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

#include "atcc/wal.hpp"

#include <cerrno>
#include <cstring>

#include "atcc/error.hpp"

namespace atcc {

WriteAheadLog::WriteAheadLog(const std::string& path) : path_(path) {
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) throw IoError("cannot create WAL " + path + ": " + std::strerror(errno));
}

WriteAheadLog::~WriteAheadLog() {
  if (file_ != nullptr) std::fclose(file_);
}

void WriteAheadLog::put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void WriteAheadLog::put64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void WriteAheadLog::write_body(const std::string& body) {
  std::string frame;
  put32(frame, static_cast<std::uint32_t>(body.size()));
  frame += body;
  if (file_ != nullptr) {
    if (std::fwrite(frame.data(), 1, frame.size(), file_) != frame.size() || std::fflush(file_) != 0) {
      throw IoError("WAL write failed: " + path_);
    }
  }
  ++records_;
  bytes_ += frame.size();
}

namespace {

std::uint64_t get(const std::string& b, std::size_t& pos, int width) {
  if (pos + static_cast<std::size_t>(width) > b.size()) throw LoadError("WAL record truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(b[pos + i])} << (8 * i);
  pos += static_cast<std::size_t>(width);
  return v;
}

}  // namespace

std::vector<WalRecord> WriteAheadLog::read_all(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open WAL " + path);
  std::string data;
  char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) data.append(buf, n);
  std::fclose(f);

  std::vector<WalRecord> out;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto len = static_cast<std::size_t>(get(data, pos, 4));
    if (pos + len > data.size()) throw LoadError("WAL record truncated");
    std::size_t end = pos + len;
    WalRecord rec;
    rec.csn = get(data, pos, 8);
    auto count = get(data, pos, 4);
    for (std::uint64_t i = 0; i < count; ++i) {
      Key k = get(data, pos, 8);
      auto plen = static_cast<std::size_t>(get(data, pos, 4));
      if (pos + plen > end) throw LoadError("WAL payload truncated");
      rec.writes.emplace_back(k, data.substr(pos, plen));
      pos += plen;
    }
    if (pos != end) throw LoadError("WAL record length mismatch");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace atcc
