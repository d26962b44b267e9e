/* Copyright 2026 The regsched Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace regsched {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A configuration value violates a documented constraint.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An index (usually an iteration number) is outside its valid range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Structured input is missing a required field or has the wrong layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A text cell could not be converted to a number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : Error(what + " (row " + std::to_string(row) + ", column " +
              std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

// Too few records for the requested operation.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Genomes of different kinds or lengths were combined.
class GenomeError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace regsched
