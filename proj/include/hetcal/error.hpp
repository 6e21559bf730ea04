/*
 *  Copyright 2026 The hetcal Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace hetcal {

// Base for every error the toolkit raises on bad input. The CLI maps all of
// these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required column is missing or the header is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell could not be parsed as a number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Input parsed but violates a contract (label outside {0,1}, empty fit set,
// arity mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetcal
