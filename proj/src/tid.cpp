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

#include "atcc/tid.hpp"

#include <sstream>

#include "atcc/error.hpp"

namespace atcc {

TransactionId TransactionId::pack(std::uint64_t wid, std::uint64_t start_ts, TxnStatus status) {
  if (wid > kWidMask) {
    throw LayoutError("wid " + std::to_string(wid) + " exceeds 16 bits");
  }
  if (start_ts >= kStartTsLimit) {
    throw LayoutError("startTS " + std::to_string(start_ts) + " exceeds 47 bits");
  }
  std::uint64_t raw = (start_ts << kWidBits) | wid;
  if (status == TxnStatus::kAborted) raw |= kStatusBit;
  return from_raw(raw);
}

std::string TransactionId::to_string() const {
  std::ostringstream os;
  os << "tid(w=" << wid() << ",ts=" << start_ts()
     << (status() == TxnStatus::kAborted ? ",aborted)" : ")");
  return os.str();
}

}  // namespace atcc
