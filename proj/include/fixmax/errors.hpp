// Copyright 2026 the fixmax authors
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

#ifndef FIXMAX_ERRORS_HPP
#define FIXMAX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fixmax {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition violations: bad dimensions, nonpositive tolerances, etc.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// A weight vector fails the simplex invariants.
class InvalidStrategy : public Error {
 public:
  explicit InvalidStrategy(const std::string& msg) : Error(msg) {}
};

// Two objects that must share dimensions do not.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

// Malformed input file or JSON document.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Request exceeds the exhaustive-enumeration limits of the oracle.
class OracleLimitExceeded : public Error {
 public:
  explicit OracleLimitExceeded(const std::string& msg) : Error(msg) {}
};

}  // namespace fixmax

#endif  // FIXMAX_ERRORS_HPP
