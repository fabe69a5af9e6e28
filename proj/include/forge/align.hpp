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

#ifndef FORGE_ALIGN_HPP_
#define FORGE_ALIGN_HPP_

#include <cstddef>
#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "forge/profile.hpp"
#include "forge/wikidata.hpp"
#include "forge/wikipedia.hpp"
#include "json.hpp"

namespace forge::align {

struct MentionAnnotation {
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string surface;
  EntityProfile profile;

  bool operator==(const MentionAnnotation&) const = default;
};

struct RelationTriplet {
  std::size_t head_idx = 0;
  std::size_t tail_idx = 0;
  std::vector<std::string> relations;

  bool operator==(const RelationTriplet&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string text;
  std::vector<MentionAnnotation> mentions;
  std::vector<RelationTriplet> triplets;

  bool operator==(const AnnotatedDocument&) const = default;
};

struct AlignCounters {
  std::size_t untitled_dropped = 0;
  std::size_t unknown_entity_dropped = 0;
};

// One mention per resolved anchor. Anchors without a qid, with a qid missing
// from the ontology, or whose entity has no title are dropped and counted.
AnnotatedDocument weak_supervise(const wikipedia::Paragraph& paragraph,
                                 const wikidata::Ontology& ontology,
                                 AlignCounters* counters = nullptr);

// Adds a triplet for every ordered pair of distinct entities that a claim in
// the ontology connects. The first mention of each entity is the endpoint;
// labels of parallel claims merge into one triplet ordered by pid.
AnnotatedDocument distant_supervise_relations(AnnotatedDocument document,
                                              const wikidata::Ontology& ontology);

struct DatasetStats {
  std::size_t articles = 0;
  std::size_t mentions = 0;
  std::size_t triplets = 0;
  std::size_t unique_entities = 0;
  std::size_t unique_aliases = 0;
  std::size_t unique_relations = 0;
  std::size_t unique_types = 0;
  // Percentages in [0, 100] of mentions whose profile has the field.
  double pct_description = 0.0;
  double pct_aliases = 0.0;
  double pct_types = 0.0;
};

// Incremental form of density_stats for streaming corpora.
class StatsAccumulator {
 public:
  void add(const AnnotatedDocument& doc);
  DatasetStats finish() const;

 private:
  DatasetStats counts_;
  std::size_t with_description_ = 0;
  std::size_t with_aliases_ = 0;
  std::size_t with_types_ = 0;
  std::set<std::string> entities_;
  std::set<std::string> aliases_;
  std::set<std::string> relations_;
  std::set<std::string> types_;
};

DatasetStats density_stats(const std::vector<AnnotatedDocument>& corpus);

// TSV with the column layout Split / #Article / ... / %Types.
void write_stats_tsv(std::ostream& out,
                     const std::vector<std::pair<std::string, DatasetStats>>& rows);

nlohmann::json to_json(const AnnotatedDocument& doc);
AnnotatedDocument document_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EntityProfile& profile);
EntityProfile profile_from_json(const nlohmann::json& j);

// Checks the document invariants (spans in range, surfaces equal slices,
// sorted mentions, valid triplet indices). Returns an empty string when the
// document is consistent, otherwise a description of the first violation.
std::string check_document(const AnnotatedDocument& doc);

}  // namespace forge::align

#endif  // FORGE_ALIGN_HPP_
