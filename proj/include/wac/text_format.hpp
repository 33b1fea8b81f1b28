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

// Helpers shared by the line-oriented text formats: exact double
// formatting, strict number parsing, and a line reader that tracks line
// numbers for error reporting.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wac::text {

/// Shortest decimal form that parses back to the identical double
/// (never more than 17 significant digits).
std::string format_double(double value);

std::vector<std::string_view> split_ws(std::string_view line);

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-blank line that is not a '#' comment; nullopt at end of input.
  std::optional<std::string> next();
  /// Like next() but throws a Truncated ParseError naming what was expected.
  std::string require(std::string_view expected);

  std::size_t line() const noexcept { return line_; }

  double parse_double(std::string_view token, const std::string& field) const;
  std::uint64_t parse_count(std::string_view token,
                            const std::string& field) const;
  std::int64_t parse_int(std::string_view token, const std::string& field) const;

  [[noreturn]] void malformed(const std::string& field,
                              const std::string& message) const;

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Splits "key=value"; returns false when there is no '='.
bool split_key_value(std::string_view token, std::string_view& key,
                     std::string_view& value);

}  // namespace wac::text
