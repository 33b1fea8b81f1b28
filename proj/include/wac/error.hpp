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
#include <string_view>

namespace wac {

enum class ErrorKind {
  InvalidArgument,
  Dimension,
  NonFinite,
  NotFound,
  Parse,
  Version,
  Truncated,
  Internal,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for all library failures. The kind drives CLI exit codes
/// and service status classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure carrying a 1-based line number and a field path such as
/// "word[3].weights[1]".
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t line, std::string field,
             const std::string& message);

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace wac
