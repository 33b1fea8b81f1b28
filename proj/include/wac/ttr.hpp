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

// Records and record types whose perceptual predicates are word
// classifiers: a judgement returns a probability instead of true/false.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "wac/composition.hpp"
#include "wac/lexicon.hpp"

namespace wac::ttr {

enum class BasicType { Ind, Real, Vector };

std::string_view to_string(BasicType t);

/// A predicate backed by the classifier of word.
struct ClassifierPredicate {
  std::string word;
  bool operator==(const ClassifierPredicate&) const = default;
};

using Constraint = std::variant<BasicType, ClassifierPredicate>;
using Value = std::variant<double, std::string, FeatureVector>;

class RecordType {
 public:
  void add(std::string label, Constraint constraint);
  const std::vector<std::pair<std::string, Constraint>>& fields() const noexcept {
    return fields_;
  }
  /// Every predicate word must have a classifier in lex.
  void validate(const Lexicon& lex) const;
  bool operator==(const RecordType&) const = default;

 private:
  std::vector<std::pair<std::string, Constraint>> fields_;
};

class Record {
 public:
  void add(std::string label, Value value);
  const Value* find(std::string_view label) const;
  const std::vector<std::pair<std::string, Value>>& fields() const noexcept { return fields_; }

 private:
  std::vector<std::pair<std::string, Value>> fields_;
};

/// Probability that record is of type rtype: the product of classifier fits
/// over predicate labels, 0 if a basic-type check fails. A label required by
/// rtype but absent from record is an error, not probability 0.
double judge(const Record& record, const RecordType& rtype, const Lexicon& lex);

/// judge >= threshold, threshold in (0, 1).
bool holds(const Record& record, const RecordType& rtype, const Lexicon& lex,
           double threshold = 0.5);

/// "x : Ind" followed by one "c<i> : wac(word)" per known token, in order.
RecordType phrase_type(const Lexicon& lex, std::span<const std::string> tokens);

/// Fills the type's Ind labels with the object id, Vector and predicate
/// labels with its features, and Real labels with 0.
Record object_record(const SceneObject& object, const RecordType& rtype);

/// Text form, one field per line: "label : Ind|Real|Vector|wac(word)".
RecordType parse_record_type(std::istream& in);
RecordType parse_record_type(std::string_view text);
std::string format_record_type(const RecordType& rtype);

}  // namespace wac::ttr
