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

#include <stdexcept>
#include <string>

namespace atcc {

// Base for all engine errors. Transaction outcomes (abort, wound) are not
// errors and are reported through status values instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A packed field does not fit its bit width.
class LayoutError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was broken; always a bug in the caller or the engine.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// No free worker slot.
class AdmissionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Serialized artifact rejected on load (bad magic, version, bucket spec).
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace atcc
