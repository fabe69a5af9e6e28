// Copyright 2026 The Forge Authors.
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

#ifndef FORGE_LINEARIZER_HPP_
#define FORGE_LINEARIZER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "forge/align.hpp"

namespace forge::linearizer {

struct TargetEntity {
  std::string mention;
  std::string title;
  std::vector<std::string> type;
  std::optional<std::string> description;
  std::vector<std::string> aliases;

  bool operator==(const TargetEntity&) const = default;
};

struct TargetTriplet {
  std::string head;
  std::string tail;
  std::vector<std::string> relations;

  bool operator==(const TargetTriplet&) const = default;
};

struct TargetObject {
  std::vector<TargetEntity> entities;
  std::vector<TargetTriplet> triplets;

  bool operator==(const TargetObject&) const = default;
};

struct Ok {
  TargetObject value;
};
struct DecodeError {
  std::size_t position = 0;  // byte offset reported by the JSON parser
  std::string message;
};
struct SchemaError {
  std::string path;  // e.g. "entities[0].mention"
  std::string message;
};

using ParseOutcome = std::variant<Ok, DecodeError, SchemaError>;

enum class Mode { kStrict, kLenient };

// Projection of a document onto the output schema.
TargetObject project(const align::AnnotatedDocument& document);

// {"entities": [...], "triplets": [...]} with keys in the fixed order
// mention, title, type, description, aliases / head, tail, relations.
std::string serialize(const TargetObject& target);
std::string serialize(const align::AnnotatedDocument& document);

// Never throws. Strict mode requires exactly the schema keys; lenient mode
// tolerates extra keys and a missing description or aliases.
ParseOutcome parse_and_validate(std::string_view text, Mode mode = Mode::kStrict);

inline bool is_ok(const ParseOutcome& o) { return std::holds_alternative<Ok>(o); }

}  // namespace forge::linearizer

#endif  // FORGE_LINEARIZER_HPP_
