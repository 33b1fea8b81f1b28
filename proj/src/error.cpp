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

#include "wac/error.hpp"

namespace wac {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Dimension: return "dimension-mismatch";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Version: return "version-mismatch";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

namespace {
std::string format_parse(ErrorKind kind, std::size_t line,
                         const std::string& field, const std::string& msg) {
  std::string out(to_string(kind));
  out += " error at line " + std::to_string(line);
  if (!field.empty()) out += " (" + field + ")";
  out += ": " + msg;
  return out;
}
}  // namespace

ParseError::ParseError(ErrorKind kind, std::size_t line, std::string field,
                       const std::string& message)
    : Error(kind, format_parse(kind, line, field, message)),
      line_(line),
      field_(std::move(field)) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace wac
