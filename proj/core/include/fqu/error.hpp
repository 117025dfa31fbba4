// Copyright 2026 The fqu Authors
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

namespace fqu {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression source. `offset` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// An identifier outside the declared variable scope.
class UnknownVariableError : public ParseError {
 public:
  UnknownVariableError(const std::string& name, std::size_t offset)
      : ParseError("unknown variable '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation failed: unbound variable or a non-finite intermediate.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent dimensions or malformed model data.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// The bump cover does not cover the fiber domain.
class CoverError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during assembly or propagation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fqu
