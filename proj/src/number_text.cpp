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

#include <cctype>
#include <charconv>
#include <cmath>

#include "wac/error.hpp"
#include "wac/text_format.hpp"

namespace wac::text {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<std::string> LineReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    auto toks = split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    return line;
  }
  return std::nullopt;
}

std::string LineReader::require(std::string_view expected) {
  auto line = next();
  if (!line) {
    throw ParseError(ErrorKind::Truncated, line_ + 1, std::string(expected),
                     "unexpected end of input");
  }
  return *line;
}

double LineReader::parse_double(std::string_view token,
                                const std::string& field) const {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    // from_chars rejects "nan"/"inf" spellings only in some forms; treat any
    // of them as a non-finite value rather than a syntax error.
    std::string lower(token);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower.find("nan") != std::string::npos || lower.find("inf") != std::string::npos) {
      throw ParseError(ErrorKind::NonFinite, line_, field,
                       "non-finite value '" + std::string(token) + "'");
    }
    malformed(field, "expected a number, got '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(ErrorKind::NonFinite, line_, field,
                     "non-finite value '" + std::string(token) + "'");
  }
  return value;
}

std::uint64_t LineReader::parse_count(std::string_view token,
                                      const std::string& field) const {
  std::uint64_t value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    malformed(field, "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return value;
}

std::int64_t LineReader::parse_int(std::string_view token,
                                   const std::string& field) const {
  std::int64_t value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    malformed(field, "expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

void LineReader::malformed(const std::string& field,
                           const std::string& message) const {
  throw ParseError(ErrorKind::Parse, line_, field, message);
}

bool split_key_value(std::string_view token, std::string_view& key,
                     std::string_view& value) {
  auto eq = token.find('=');
  if (eq == std::string_view::npos) return false;
  key = token.substr(0, eq);
  value = token.substr(eq + 1);
  return true;
}

}  // namespace wac::text
