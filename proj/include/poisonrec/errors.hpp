// Copyright 2026 the poisonrec authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace poisonrec {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate a precondition (bad dimensions,
// out-of-range values, inconsistent configs).
struct InvalidInputError : Error {
  using Error::Error;
};

// A duplicate (user, item) pair was inserted into a ratings matrix.
struct DuplicateEntryError : InvalidInputError {
  using InvalidInputError::InvalidInputError;
};

// Numerical failure: non-finite values, or an internal invariant of the
// positive-definite update machinery was violated.
struct NumericalError : Error {
  using Error::Error;
};

// A user or item has no observed ratings and the operation cannot proceed.
struct ColdStartError : Error {
  using Error::Error;
};

// A required per-cluster rating statistic is absent.
struct MissingStatisticError : Error {
  using Error::Error;
};

// No item satisfies the target-selection predicate.
struct NoCandidateError : Error {
  using Error::Error;
};

// The pre-attack predicted rating already equals the maximum rating, so the
// relative-change metric is undefined.
struct SaturatedItemError : Error {
  using Error::Error;
};

// Malformed input file; carries the 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& message, std::size_t line)
      : Error(message + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::size_t line_number;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace poisonrec
