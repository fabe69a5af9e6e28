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

#include "forge/linearizer.hpp"

#include <set>

#include "json.hpp"

namespace forge::linearizer {

using nlohmann::json;

TargetObject project(const align::AnnotatedDocument& document) {
  TargetObject t;
  for (const auto& m : document.mentions) {
    t.entities.push_back(
        {m.surface, m.profile.title, m.profile.types, m.profile.description, m.profile.aliases});
  }
  for (const auto& tr : document.triplets) {
    t.triplets.push_back(
        {document.mentions[tr.head_idx].surface, document.mentions[tr.tail_idx].surface, tr.relations});
  }
  return t;
}

namespace {

void put_string(std::string& out, const std::string& s) {
  out += json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

void put_list(std::string& out, const std::vector<std::string>& items) {
  out.push_back('[');
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    put_string(out, items[i]);
  }
  out.push_back(']');
}

}  // namespace

std::string serialize(const TargetObject& target) {
  std::string out = "{\"entities\": [";
  for (std::size_t i = 0; i < target.entities.size(); ++i) {
    const TargetEntity& e = target.entities[i];
    if (i > 0) out += ", ";
    out += "{\"mention\": ";
    put_string(out, e.mention);
    out += ", \"title\": ";
    put_string(out, e.title);
    out += ", \"type\": ";
    put_list(out, e.type);
    out += ", \"description\": ";
    if (e.description) {
      put_string(out, *e.description);
    } else {
      out += "null";
    }
    out += ", \"aliases\": ";
    put_list(out, e.aliases);
    out.push_back('}');
  }
  out += "], \"triplets\": [";
  for (std::size_t i = 0; i < target.triplets.size(); ++i) {
    const TargetTriplet& t = target.triplets[i];
    if (i > 0) out += ", ";
    out += "{\"head\": ";
    put_string(out, t.head);
    out += ", \"tail\": ";
    put_string(out, t.tail);
    out += ", \"relations\": ";
    put_list(out, t.relations);
    out.push_back('}');
  }
  out += "]}";
  return out;
}

std::string serialize(const align::AnnotatedDocument& document) { return serialize(project(document)); }

namespace {

struct Invalid {
  std::string path;
  std::string message;
};

class Validator {
 public:
  explicit Validator(Mode mode) : mode_(mode) {}

  TargetObject root(const json& j) {
    if (!j.is_object()) fail("", "top level must be an object");
    allow_keys(j, "", {"entities", "triplets"});
    TargetObject out;
    const json& entities = require(j, "", "entities");
    if (!entities.is_array()) fail("entities", "must be an array");
    for (std::size_t i = 0; i < entities.size(); ++i) {
      out.entities.push_back(entity(entities[i], "entities[" + std::to_string(i) + "]"));
    }
    const json& triplets = require(j, "", "triplets");
    if (!triplets.is_array()) fail("triplets", "must be an array");
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      out.triplets.push_back(triplet(triplets[i], "triplets[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  [[noreturn]] static void fail(std::string path, std::string message) {
    throw Invalid{std::move(path), std::move(message)};
  }

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  void allow_keys(const json& obj, const std::string& path, std::set<std::string> allowed) const {
    if (mode_ == Mode::kLenient) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.contains(it.key())) fail(join(path, it.key()), "unexpected key");
    }
  }

  static const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "missing required key");
    return *it;
  }

  static std::string string_at(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_string()) fail(join(path, key), "must be a string");
    return v.get<std::string>();
  }

  static std::vector<std::string> strings_at(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "must be an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "must be a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  TargetEntity entity(const json& e, const std::string& path) const {
    if (!e.is_object()) fail(path, "must be an object");
    allow_keys(e, path, {"mention", "title", "type", "description", "aliases"});
    TargetEntity out;
    out.mention = string_at(e, path, "mention");
    out.title = string_at(e, path, "title");
    out.type = strings_at(require(e, path, "type"), join(path, "type"));
    auto d = e.find("description");
    if (d == e.end()) {
      if (mode_ == Mode::kStrict) fail(join(path, "description"), "missing required key");
    } else if (d->is_string()) {
      out.description = d->get<std::string>();
    } else if (!d->is_null()) {
      fail(join(path, "description"), "must be a string or null");
    }
    auto a = e.find("aliases");
    if (a == e.end()) {
      if (mode_ == Mode::kStrict) fail(join(path, "aliases"), "missing required key");
    } else {
      out.aliases = strings_at(*a, join(path, "aliases"));
    }
    return out;
  }

  TargetTriplet triplet(const json& t, const std::string& path) const {
    if (!t.is_object()) fail(path, "must be an object");
    allow_keys(t, path, {"head", "tail", "relations"});
    TargetTriplet out;
    out.head = string_at(t, path, "head");
    out.tail = string_at(t, path, "tail");
    out.relations = strings_at(require(t, path, "relations"), join(path, "relations"));
    return out;
  }

  Mode mode_;
};

}  // namespace

ParseOutcome parse_and_validate(std::string_view text, Mode mode) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    return DecodeError{e.byte, e.what()};
  }
  try {
    return Ok{Validator(mode).root(j)};
  } catch (const Invalid& inv) {
    return SchemaError{inv.path, inv.message};
  }
}

}  // namespace forge::linearizer
