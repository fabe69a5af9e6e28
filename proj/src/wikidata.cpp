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

#include "forge/wikidata.hpp"

#include <algorithm>
#include <string>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/log.hpp"
#include "json.hpp"

namespace forge::wikidata {

using nlohmann::json;

void Ontology::add_entity(EntityRecord record) {
  const std::string qid = record.qid;
  if (auto it = entities_.find(qid); it != entities_.end()) {
    for (auto t = title_index_.begin(); t != title_index_.end();) {
      if (t->second == qid) {
        title_origin_.erase(t->first);
        t = title_index_.erase(t);
      } else {
        ++t;
      }
    }
    it->second = std::move(record);
  } else {
    entities_.emplace(qid, std::move(record));
  }
  const EntityRecord& stored = entities_.at(qid);

  // Wikipedia page titles are unique, so sitelink-derived keys win over
  // label-derived ones; remaining collisions go to the lower qid.
  std::string key;
  bool from_sitelink = false;
  if (stored.wiki_title && !stored.wiki_title->empty()) {
    key = text::normalize_title(*stored.wiki_title);
    from_sitelink = true;
  } else if (stored.label && !stored.label->empty()) {
    key = text::normalize_title(*stored.label);
  }
  if (key.empty()) return;
  auto existing = title_index_.find(key);
  if (existing == title_index_.end()) {
    title_index_.emplace(key, qid);
    title_origin_.emplace(key, from_sitelink);
    return;
  }
  const bool existing_sitelink = title_origin_.at(key);
  const bool replace = (from_sitelink && !existing_sitelink) ||
                       (from_sitelink == existing_sitelink && text::IdLess{}(qid, existing->second));
  if (replace) {
    existing->second = qid;
    title_origin_[key] = from_sitelink;
  }
}

void Ontology::add_property(PropertyRecord record) {
  const std::string pid = record.pid;
  properties_.insert_or_assign(pid, std::move(record));
}

void Ontology::set_snapshot_date(Date date) {
  if (snapshot_date_) throw Error("ontology snapshot date already set");
  snapshot_date_ = date;
}

const EntityRecord* Ontology::find(std::string_view qid) const {
  auto it = entities_.find(qid);
  return it == entities_.end() ? nullptr : &it->second;
}

const EntityRecord& Ontology::at(std::string_view qid) const {
  if (const EntityRecord* r = find(qid)) return *r;
  throw LookupError("entity " + std::string(qid) + " not in ontology");
}

const PropertyRecord* Ontology::find_property(std::string_view pid) const {
  auto it = properties_.find(pid);
  return it == properties_.end() ? nullptr : &it->second;
}

std::optional<std::string> Ontology::qid_for_title(std::string_view normalized_title) const {
  auto it = title_index_.find(std::string(normalized_title));
  if (it == title_index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::optional<std::string> language_value(const json& entity, const char* field,
                                          const std::string& language) {
  auto f = entity.find(field);
  if (f == entity.end() || !f->is_object()) return std::nullopt;
  auto slot = f->find(language);
  if (slot == f->end() || !slot->is_object()) return std::nullopt;
  auto value = slot->find("value");
  if (value == slot->end() || !value->is_string()) return std::nullopt;
  return value->get<std::string>();
}

// Object qid of an entity-valued main snak, if any.
std::optional<std::string> entity_object(const json& statement) {
  auto snak = statement.find("mainsnak");
  if (snak == statement.end() || !snak->is_object()) return std::nullopt;
  if (snak->value("snaktype", "") != "value") return std::nullopt;
  auto dv = snak->find("datavalue");
  if (dv == snak->end() || !dv->is_object()) return std::nullopt;
  if (dv->value("type", "") != "wikibase-entityid") return std::nullopt;
  auto value = dv->find("value");
  if (value == dv->end() || !value->is_object()) return std::nullopt;
  if (auto id = value->find("id"); id != value->end() && id->is_string()) {
    std::string qid = id->get<std::string>();
    if (text::is_qid(qid)) return qid;
    return std::nullopt;
  }
  if (value->value("entity-type", "") == "item") {
    auto numeric = value->find("numeric-id");
    if (numeric != value->end() && numeric->is_number_unsigned()) {
      return "Q" + std::to_string(numeric->get<std::uint64_t>());
    }
  }
  return std::nullopt;
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

EntityRecord entity_from_dump(const json& j, const std::string& qid, const IngestOptions& opt) {
  EntityRecord r;
  r.qid = qid;
  r.label = language_value(j, "labels", opt.language);
  r.description = language_value(j, "descriptions", opt.language);
  if (auto aliases = j.find("aliases"); aliases != j.end() && aliases->is_object()) {
    if (auto slot = aliases->find(opt.language); slot != aliases->end() && slot->is_array()) {
      for (const json& a : *slot) {
        if (a.is_object() && a.contains("value") && a["value"].is_string()) {
          push_unique(r.aliases, a["value"].get<std::string>());
        }
      }
    }
  }
  if (auto claims = j.find("claims"); claims != j.end() && claims->is_object()) {
    // Iterate in pid order so output does not depend on key order in the line.
    std::vector<std::string> pids;
    for (auto it = claims->begin(); it != claims->end(); ++it) pids.push_back(it.key());
    std::sort(pids.begin(), pids.end(), text::IdLess{});
    for (const std::string& pid : pids) {
      if (!text::is_pid(pid)) continue;
      const json& statements = (*claims)[pid];
      if (!statements.is_array()) continue;
      for (const json& st : statements) {
        if (!st.is_object()) continue;
        std::optional<std::string> object = entity_object(st);
        if (!object) continue;
        Claim c{pid, *object};
        if (std::find(r.claims.begin(), r.claims.end(), c) == r.claims.end()) r.claims.push_back(c);
        if (pid == opt.type_property) push_unique(r.instance_of, *object);
        if (pid == opt.hierarchy_property) push_unique(r.subclass_of, *object);
      }
    }
  }
  if (auto sitelinks = j.find("sitelinks"); sitelinks != j.end() && sitelinks->is_object()) {
    r.sitelink_count = sitelinks->size();
    auto wiki = sitelinks->find(opt.language + "wiki");
    if (wiki != sitelinks->end() && wiki->is_object()) {
      auto title = wiki->find("title");
      if (title != wiki->end() && title->is_string()) r.wiki_title = title->get<std::string>();
    }
  }
  return r;
}

std::string_view strip_line(std::string_view line) {
  line = text::trim(line);
  if (!line.empty() && line.back() == ',') line.remove_suffix(1);
  return text::trim(line);
}

// Fast path for the canonical dump layout: the top-level id precedes any
// nested object, so an unlisted item can be rejected without a full parse.
std::optional<std::string> leading_item_id(std::string_view line) {
  static constexpr std::string_view kPrefixes[] = {R"({"type":"item","id":")", R"({"id":")"};
  for (std::string_view prefix : kPrefixes) {
    if (line.substr(0, prefix.size()) != prefix) continue;
    std::string_view rest = line.substr(prefix.size());
    const std::size_t quote = rest.find('"');
    if (quote == std::string_view::npos) return std::nullopt;
    std::string id(rest.substr(0, quote));
    if (text::is_qid(id)) return id;
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

ParsedLine parse_dump_line(std::string_view raw, const IngestOptions& options) {
  ParsedLine out;
  std::string_view line = strip_line(raw);
  if (line.empty() || line == "[" || line == "]") return out;
  json j = json::parse(line.begin(), line.end());
  if (!j.is_object()) throw Error("line is not a JSON object");
  auto id_it = j.find("id");
  if (id_it == j.end() || !id_it->is_string()) throw Error("entity without string id");
  const std::string id = id_it->get<std::string>();
  const std::string type = j.value("type", "");
  if (type == "property" || (type.empty() && !id.empty() && id[0] == 'P')) {
    if (!text::is_pid(id)) throw Error("malformed property id '" + id + "'");
    if (auto label = language_value(j, "labels", options.language); label && !label->empty()) {
      out.property = PropertyRecord{id, *label};
    }
    return out;
  }
  if (type == "item" || type.empty()) {
    if (!text::is_qid(id)) throw Error("malformed entity id '" + id + "'");
    out.entity = entity_from_dump(j, id, options);
  }
  // Lexemes and other entity kinds are ignored.
  return out;
}

Ontology parse_wikidata_dump(std::istream& in, const IngestOptions& options,
                             IngestReport* report) {
  if (!in.good()) throw IngestError("wikidata dump stream is not readable");
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  Ontology onto;
  if (options.snapshot_date) onto.set_snapshot_date(*options.snapshot_date);

  std::string line;
  while (std::getline(in, line)) {
    ++rep.lines_read;
    if (options.allowlist) {
      if (auto id = leading_item_id(line); id && !options.allowlist->contains(*id)) {
        ++rep.filtered_out;
        continue;
      }
    }
    ParsedLine parsed;
    try {
      parsed = parse_dump_line(line, options);
    } catch (const std::exception& e) {
      rep.skipped.push_back({rep.lines_read, e.what()});
      continue;
    }
    if (parsed.property) {
      onto.add_property(std::move(*parsed.property));
      ++rep.properties_kept;
    } else if (parsed.entity) {
      if (options.allowlist && !options.allowlist->contains(parsed.entity->qid)) {
        ++rep.filtered_out;
        continue;
      }
      onto.add_entity(std::move(*parsed.entity));
      ++rep.entities_kept;
    }
  }
  if (in.bad()) throw IngestError("wikidata dump read failed after line " + std::to_string(rep.lines_read));
  return onto;
}

EntityProfile resolve_entity_profile(std::string_view qid, const Ontology& ontology) {
  const EntityRecord& r = ontology.at(qid);
  EntityProfile p;
  p.qid = r.qid;
  if (r.label && !r.label->empty()) {
    p.title = *r.label;
  } else if (r.wiki_title) {
    p.title = *r.wiki_title;
  }
  for (const std::string& type_qid : r.instance_of) {
    const EntityRecord* type = ontology.find(type_qid);
    if (type == nullptr || !type->label || type->label->empty()) {
      log::warning("type " + type_qid + " of " + r.qid + " has no label in the ontology; dropped");
      continue;
    }
    p.types.push_back(*type->label);
    p.type_qids.push_back(type_qid);
  }
  p.description = r.description;
  p.aliases = r.aliases;
  return p;
}

std::vector<std::string> abstract_types_of(std::string_view base_type_qid, const Ontology& ontology) {
  return ontology.at(base_type_qid).subclass_of;
}

bool more_important(const EntityRecord& a, const EntityRecord& b) {
  if (a.sitelink_count != b.sitelink_count) return a.sitelink_count > b.sitelink_count;
  return text::IdLess{}(a.qid, b.qid);
}

std::vector<std::string> importance_rank(std::vector<std::string> qids, const Ontology& ontology) {
  for (const std::string& q : qids) ontology.at(q);
  std::stable_sort(qids.begin(), qids.end(), [&](const std::string& a, const std::string& b) {
    return more_important(*ontology.find(a), *ontology.find(b));
  });
  return qids;
}

namespace {

json to_json(const EntityRecord& r) {
  json j;
  j["kind"] = "entity";
  j["qid"] = r.qid;
  j["label"] = r.label ? json(*r.label) : json(nullptr);
  j["description"] = r.description ? json(*r.description) : json(nullptr);
  j["aliases"] = r.aliases;
  j["instance_of"] = r.instance_of;
  j["subclass_of"] = r.subclass_of;
  j["sitelink_count"] = r.sitelink_count;
  j["wiki_title"] = r.wiki_title ? json(*r.wiki_title) : json(nullptr);
  json claims = json::array();
  for (const Claim& c : r.claims) claims.push_back({c.pid, c.object_qid});
  j["claims"] = std::move(claims);
  return j;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

EntityRecord entity_from_snapshot(const json& j) {
  EntityRecord r;
  r.qid = j.at("qid").get<std::string>();
  r.label = optional_string(j, "label");
  r.description = optional_string(j, "description");
  r.aliases = j.value("aliases", std::vector<std::string>{});
  r.instance_of = j.value("instance_of", std::vector<std::string>{});
  r.subclass_of = j.value("subclass_of", std::vector<std::string>{});
  r.sitelink_count = j.value("sitelink_count", std::uint64_t{0});
  r.wiki_title = optional_string(j, "wiki_title");
  for (const json& c : j.value("claims", json::array())) {
    r.claims.push_back({c.at(0).get<std::string>(), c.at(1).get<std::string>()});
  }
  return r;
}

}  // namespace

void write_snapshot(const Ontology& ontology, std::ostream& out) {
  json header = io::jsonl_header("forge-ontology");
  header["snapshot_date"] =
      ontology.snapshot_date() ? json(format_date(*ontology.snapshot_date())) : json(nullptr);
  header["entities"] = ontology.entities().size();
  header["properties"] = ontology.properties().size();
  out << header.dump() << '\n';
  for (const auto& [pid, p] : ontology.properties()) {
    out << json{{"kind", "property"}, {"pid", p.pid}, {"label", p.label}}.dump() << '\n';
  }
  for (const auto& [qid, r] : ontology.entities()) out << to_json(r).dump() << '\n';
}

Ontology read_snapshot(std::istream& in) {
  Ontology onto;
  bool saw_header = false;
  io::for_each_jsonl(
      in,
      [&](const json& j) {
        const std::string kind = j.value("kind", "");
        if (kind == "property") {
          onto.add_property({j.at("pid").get<std::string>(), j.at("label").get<std::string>()});
        } else if (kind == "entity") {
          onto.add_entity(entity_from_snapshot(j));
        } else {
          throw Error("unknown snapshot record kind '" + kind + "'");
        }
      },
      [&](const json& header) {
        if (header.value("format", "") != "forge-ontology") throw Error("not an ontology snapshot");
        saw_header = true;
        auto date = header.find("snapshot_date");
        if (date != header.end() && date->is_string()) {
          auto parsed = parse_date(date->get<std::string>());
          if (!parsed) throw Error("bad snapshot_date in ontology header");
          onto.set_snapshot_date(*parsed);
        }
      });
  if (!saw_header) throw Error("ontology snapshot is missing its header line");
  return onto;
}

Ontology load_snapshot(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  try {
    return read_snapshot(*in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("'" + path.string() + "': " + e.what());
  }
}

}  // namespace forge::wikidata
