// Copyright 2026 The squeezemag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace squeezemag {

/// Bad caller input: non-finite angles, negative durations, out-of-range sizes.
class InvalidArgument : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// A propagator or solver could not reach the requested tolerance.
class NumericalFailure : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Too few shots / points for the requested statistic.
class InsufficientData : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Input is well-formed but the statistic is undefined on it (zero totals, rank deficiency).
class DegenerateInput : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A value lies outside the domain of an inverse formula.
class OutOfRange : public std::out_of_range {
   public:
    using std::out_of_range::out_of_range;
};

/// Run or analysis configuration is invalid. `where` names the offending field.
class ConfigError : public std::runtime_error {
   public:
    ConfigError(const std::string &where, const std::string &what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where) {}
    const std::string &where() const { return where_; }

   private:
    std::string where_;
};

/// A shot-record CSV does not match the expected schema.
class SchemaError : public std::runtime_error {
   public:
    SchemaError(long row, const std::string &what)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
    long row() const { return row_; }

   private:
    long row_;
};

}  // namespace squeezemag
