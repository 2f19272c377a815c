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

#include "atcc/action.hpp"

#include <array>
#include <utility>

#include "atcc/error.hpp"

namespace atcc {

namespace {

constexpr std::array<std::pair<Action, std::string_view>, 5> kNames{{
    {Action::kLockHotRead, "hot_read"},
    {Action::kLockHotWrite, "hot_write"},
    {Action::kLockFullRead, "full_read"},
    {Action::kLockFullWrite, "full_write"},
    {Action::kPrioritize, "prioritize"},
}};

}  // namespace

std::string ActionSet::to_string() const {
  if (empty()) return "occ";
  std::string out;
  for (const auto& [a, name] : kNames) {
    if (!has(a)) continue;
    if (!out.empty()) out += '+';
    out += name;
  }
  return out;
}

ActionSet ActionSet::parse(std::string_view text) {
  if (text == "occ" || text.empty()) return kRemainOcc;
  ActionSet out;
  while (!text.empty()) {
    auto plus = text.find('+');
    std::string_view part = text.substr(0, plus);
    bool found = false;
    for (const auto& [a, name] : kNames) {
      if (part == name) {
        out = out | a;
        found = true;
      }
    }
    if (!found) throw ConfigError("unknown action '" + std::string(part) + "'");
    if (plus == std::string_view::npos) break;
    text.remove_prefix(plus + 1);
  }
  return out;
}

}  // namespace atcc
