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

#include "forge/align.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge::align {

using nlohmann::json;

AnnotatedDocument weak_supervise(const wikipedia::Paragraph& paragraph,
                                 const wikidata::Ontology& ontology, AlignCounters* counters) {
  AnnotatedDocument doc;
  doc.doc_id = paragraph.doc_id;
  doc.text = paragraph.text;
  for (const wikipedia::AnchorSpan& a : paragraph.anchors) {
    if (!a.qid || !ontology.contains(*a.qid)) {
      if (counters) ++counters->unknown_entity_dropped;
      continue;
    }
    EntityProfile profile = wikidata::resolve_entity_profile(*a.qid, ontology);
    if (profile.title.empty()) {
      if (counters) ++counters->untitled_dropped;
      continue;
    }
    doc.mentions.push_back({a.char_start, a.char_end, a.surface, std::move(profile)});
  }
  std::stable_sort(doc.mentions.begin(), doc.mentions.end(),
                   [](const MentionAnnotation& x, const MentionAnnotation& y) {
                     return x.char_start < y.char_start;
                   });
  return doc;
}

AnnotatedDocument distant_supervise_relations(AnnotatedDocument document,
                                              const wikidata::Ontology& ontology) {
  // First mention (lowest start) of each entity; mentions are sorted.
  std::vector<std::size_t> endpoints;
  std::map<std::string, std::size_t> first_of;
  for (std::size_t i = 0; i < document.mentions.size(); ++i) {
    if (first_of.emplace(document.mentions[i].profile.qid, i).second) endpoints.push_back(i);
  }

  std::vector<RelationTriplet> triplets;
  for (std::size_t h : endpoints) {
    const wikidata::EntityRecord* head = ontology.find(document.mentions[h].profile.qid);
    if (head == nullptr) continue;
    for (std::size_t t : endpoints) {
      if (t == h) continue;
      const std::string& tail_qid = document.mentions[t].profile.qid;
      std::vector<std::string> pids;
      for (const wikidata::Claim& c : head->claims) {
        if (c.object_qid == tail_qid && ontology.find_property(c.pid) != nullptr) {
          pids.push_back(c.pid);
        }
      }
      if (pids.empty()) continue;
      std::sort(pids.begin(), pids.end(), text::IdLess{});
      pids.erase(std::unique(pids.begin(), pids.end()), pids.end());
      RelationTriplet trip{h, t, {}};
      for (const std::string& pid : pids) {
        const std::string& label = ontology.find_property(pid)->label;
        if (std::find(trip.relations.begin(), trip.relations.end(), label) == trip.relations.end()) {
          trip.relations.push_back(label);
        }
      }
      triplets.push_back(std::move(trip));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const RelationTriplet& a, const RelationTriplet& b) {
    return std::tie(a.head_idx, a.tail_idx) < std::tie(b.head_idx, b.tail_idx);
  });
  document.triplets = std::move(triplets);
  return document;
}

void StatsAccumulator::add(const AnnotatedDocument& doc) {
  ++counts_.articles;
  counts_.mentions += doc.mentions.size();
  counts_.triplets += doc.triplets.size();
  for (const MentionAnnotation& m : doc.mentions) {
    const EntityProfile& p = m.profile;
    entities_.insert(p.qid);
    for (const std::string& a : p.aliases) aliases_.insert(a);
    for (const std::string& t : p.types) types_.insert(t);
    if (p.description && !p.description->empty()) ++with_description_;
    if (!p.aliases.empty()) ++with_aliases_;
    if (!p.types.empty()) ++with_types_;
  }
  for (const RelationTriplet& t : doc.triplets) {
    for (const std::string& r : t.relations) relations_.insert(r);
  }
}

DatasetStats StatsAccumulator::finish() const {
  DatasetStats s = counts_;
  s.unique_entities = entities_.size();
  s.unique_aliases = aliases_.size();
  s.unique_relations = relations_.size();
  s.unique_types = types_.size();
  if (s.mentions > 0) {
    const double n = static_cast<double>(s.mentions);
    s.pct_description = 100.0 * static_cast<double>(with_description_) / n;
    s.pct_aliases = 100.0 * static_cast<double>(with_aliases_) / n;
    s.pct_types = 100.0 * static_cast<double>(with_types_) / n;
  }
  return s;
}

DatasetStats density_stats(const std::vector<AnnotatedDocument>& corpus) {
  StatsAccumulator acc;
  for (const AnnotatedDocument& d : corpus) acc.add(d);
  return acc.finish();
}

void write_stats_tsv(std::ostream& out,
                     const std::vector<std::pair<std::string, DatasetStats>>& rows) {
  out << "Split\t#Article\t#Mention\t#Triplets\t#Ent.\t#Aliases\t#Rel.\t#Types\t%Desc.\t%Aliases\t%Types\n";
  for (const auto& [split, s] : rows) {
    char pct[96];
    std::snprintf(pct, sizeof pct, "%.1f\t%.1f\t%.1f", s.pct_description, s.pct_aliases, s.pct_types);
    out << split << '\t' << s.articles << '\t' << s.mentions << '\t' << s.triplets << '\t'
        << s.unique_entities << '\t' << s.unique_aliases << '\t' << s.unique_relations << '\t'
        << s.unique_types << '\t' << pct << '\n';
  }
}

json to_json(const EntityProfile& p) {
  json j;
  j["qid"] = p.qid;
  j["title"] = p.title;
  j["types"] = p.types;
  j["type_qids"] = p.type_qids;
  j["description"] = p.description ? json(*p.description) : json(nullptr);
  j["aliases"] = p.aliases;
  return j;
}

EntityProfile profile_from_json(const json& j) {
  EntityProfile p;
  p.qid = j.at("qid").get<std::string>();
  p.title = j.at("title").get<std::string>();
  p.types = j.value("types", std::vector<std::string>{});
  p.type_qids = j.value("type_qids", std::vector<std::string>{});
  if (auto d = j.find("description"); d != j.end() && d->is_string()) p.description = d->get<std::string>();
  p.aliases = j.value("aliases", std::vector<std::string>{});
  return p;
}

json to_json(const AnnotatedDocument& doc) {
  json mentions = json::array();
  for (const MentionAnnotation& m : doc.mentions) {
    mentions.push_back({{"start", m.char_start},
                        {"end", m.char_end},
                        {"surface", m.surface},
                        {"profile", to_json(m.profile)}});
  }
  json triplets = json::array();
  for (const RelationTriplet& t : doc.triplets) {
    triplets.push_back({{"head", t.head_idx}, {"tail", t.tail_idx}, {"relations", t.relations}});
  }
  json j;
  j["doc_id"] = doc.doc_id;
  j["text"] = doc.text;
  j["mentions"] = std::move(mentions);
  j["triplets"] = std::move(triplets);
  return j;
}

AnnotatedDocument document_from_json(const json& j) {
  AnnotatedDocument doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  doc.text = j.at("text").get<std::string>();
  for (const json& m : j.value("mentions", json::array())) {
    doc.mentions.push_back({m.at("start").get<std::size_t>(), m.at("end").get<std::size_t>(),
                            m.at("surface").get<std::string>(), profile_from_json(m.at("profile"))});
  }
  for (const json& t : j.value("triplets", json::array())) {
    doc.triplets.push_back({t.at("head").get<std::size_t>(), t.at("tail").get<std::size_t>(),
                            t.at("relations").get<std::vector<std::string>>()});
  }
  if (std::string err = check_document(doc); !err.empty()) {
    throw Error("document " + doc.doc_id + ": " + err);
  }
  return doc;
}

std::string check_document(const AnnotatedDocument& doc) {
  const std::size_t len = text::scalar_length(doc.text);
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    const MentionAnnotation& m = doc.mentions[i];
    if (m.char_start >= m.char_end || m.char_end > len) {
      return "mention " + std::to_string(i) + " has an invalid span";
    }
    if (text::scalar_slice(doc.text, m.char_start, m.char_end) != m.surface) {
      return "mention " + std::to_string(i) + " surface does not match the text";
    }
    if (i > 0 && doc.mentions[i - 1].char_start > m.char_start) return "mentions are not sorted";
    if (m.profile.types.size() != m.profile.type_qids.size()) {
      return "mention " + std::to_string(i) + " has misaligned types";
    }
  }
  for (std::size_t i = 0; i < doc.triplets.size(); ++i) {
    const RelationTriplet& t = doc.triplets[i];
    if (t.head_idx >= doc.mentions.size() || t.tail_idx >= doc.mentions.size()) {
      return "triplet " + std::to_string(i) + " endpoint out of range";
    }
    if (t.head_idx == t.tail_idx) return "triplet " + std::to_string(i) + " is a self-loop";
    if (t.relations.empty()) return "triplet " + std::to_string(i) + " has no relations";
  }
  return {};
}

}  // namespace forge::align
