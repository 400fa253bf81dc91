// Copyright 2026 The bbga-lab Authors.
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

namespace bbga {

// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user configuration (bad flags, schema violations, invalid ranges).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that violates a GraphBundle invariant or cannot be read.
class DataError : public Error {
 public:
  using Error::Error;
};

// Incompatible matrix shapes handed to a numeric routine.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A numeric precondition failed (non-positive degree, empty set, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

// An attack ran out of eligible node pairs before spending its budget.
class PoolExhausted : public Error {
 public:
  using Error::Error;
};

}  // namespace bbga
