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

#include "wac/ttr.hpp"

#include <cmath>
#include <sstream>

#include "wac/error.hpp"
#include "wac/text_format.hpp"

namespace wac::ttr {

std::string_view to_string(BasicType t) {
  switch (t) {
    case BasicType::Ind: return "Ind";
    case BasicType::Real: return "Real";
    case BasicType::Vector: return "Vector";
  }
  return "?";
}

void RecordType::add(std::string label, Constraint constraint) {
  for (const auto& [l, c] : fields_) {
    if (l == label) fail(ErrorKind::InvalidArgument, "duplicate label '" + label + "'");
  }
  fields_.emplace_back(std::move(label), std::move(constraint));
}

void RecordType::validate(const Lexicon& lex) const {
  for (const auto& [label, c] : fields_) {
    if (const auto* p = std::get_if<ClassifierPredicate>(&c)) {
      if (!lex.contains(p->word)) {
        fail(ErrorKind::InvalidArgument,
             "label '" + label + "': no classifier for '" + p->word + "'");
      }
    }
  }
}

void Record::add(std::string label, Value value) {
  if (find(label) != nullptr) fail(ErrorKind::InvalidArgument, "duplicate label '" + label + "'");
  fields_.emplace_back(std::move(label), std::move(value));
}

const Value* Record::find(std::string_view label) const {
  for (const auto& [l, v] : fields_) {
    if (l == label) return &v;
  }
  return nullptr;
}

double judge(const Record& record, const RecordType& rtype, const Lexicon& lex) {
  rtype.validate(lex);
  for (const auto& [label, c] : rtype.fields()) {
    if (record.find(label) == nullptr) {
      fail(ErrorKind::NotFound, "record lacks label '" + label + "'");
    }
  }
  const double eps = lex.config().prob_clamp_eps;
  std::vector<double> logs;
  for (const auto& [label, c] : rtype.fields()) {
    const Value& value = *record.find(label);
    if (const auto* basic = std::get_if<BasicType>(&c)) {
      bool ok = false;
      switch (*basic) {
        case BasicType::Ind: ok = std::holds_alternative<std::string>(value); break;
        case BasicType::Real:
          ok = std::holds_alternative<double>(value) && std::isfinite(std::get<double>(value));
          break;
        case BasicType::Vector: {
          const auto* v = std::get_if<FeatureVector>(&value);
          ok = v != nullptr && v->size() == lex.dim();
          break;
        }
      }
      if (!ok) return 0.0;
      continue;
    }
    const auto& pred = std::get<ClassifierPredicate>(c);
    const auto* features = std::get_if<FeatureVector>(&value);
    if (features == nullptr) return 0.0;
    logs.push_back(log_fit(lex.at(pred.word), *features, eps));
  }
  return product_from_logs(logs);
}

bool holds(const Record& record, const RecordType& rtype, const Lexicon& lex,
           double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    fail(ErrorKind::InvalidArgument, "threshold must be in (0, 1)");
  }
  return judge(record, rtype, lex) >= threshold;
}

RecordType phrase_type(const Lexicon& lex, std::span<const std::string> tokens) {
  RecordType t;
  t.add("x", BasicType::Ind);
  std::size_t i = 0;
  for (const auto& tok : tokens) {
    if (!lex.contains(tok)) continue;
    t.add("c" + std::to_string(i++), ClassifierPredicate{tok});
  }
  return t;
}

Record object_record(const SceneObject& object, const RecordType& rtype) {
  Record r;
  for (const auto& [label, c] : rtype.fields()) {
    if (const auto* basic = std::get_if<BasicType>(&c)) {
      switch (*basic) {
        case BasicType::Ind: r.add(label, object.id); break;
        case BasicType::Real: r.add(label, 0.0); break;
        case BasicType::Vector: r.add(label, object.features); break;
      }
    } else {
      r.add(label, object.features);
    }
  }
  return r;
}

RecordType parse_record_type(std::istream& in) {
  text::LineReader reader(in);
  RecordType t;
  while (auto line = reader.next()) {
    const auto toks = text::split_ws(*line);
    const std::string field = "field[" + std::to_string(t.fields().size()) + "]";
    if (toks.size() != 3 || toks[1] != ":") {
      reader.malformed(field, "expected 'label : type'");
    }
    const std::string label(toks[0]);
    const std::string_view type = toks[2];
    Constraint c;
    if (type == "Ind") {
      c = BasicType::Ind;
    } else if (type == "Real") {
      c = BasicType::Real;
    } else if (type == "Vector") {
      c = BasicType::Vector;
    } else if (type.size() > 5 && type.substr(0, 4) == "wac(" && type.back() == ')') {
      c = ClassifierPredicate{std::string(type.substr(4, type.size() - 5))};
    } else {
      reader.malformed(field, "unknown type '" + std::string(type) + "'");
    }
    try {
      t.add(label, std::move(c));
    } catch (const Error& e) {
      reader.malformed(field, e.what());
    }
  }
  return t;
}

RecordType parse_record_type(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_record_type(in);
}

std::string format_record_type(const RecordType& rtype) {
  std::string out;
  for (const auto& [label, c] : rtype.fields()) {
    out += label + " : ";
    if (const auto* basic = std::get_if<BasicType>(&c)) {
      out += to_string(*basic);
    } else {
      out += "wac(" + std::get<ClassifierPredicate>(c).word + ")";
    }
    out += '\n';
  }
  return out;
}

}  // namespace wac::ttr
