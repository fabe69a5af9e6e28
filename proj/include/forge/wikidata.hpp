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

#ifndef FORGE_WIKIDATA_HPP_
#define FORGE_WIKIDATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "forge/date.hpp"
#include "forge/profile.hpp"
#include "forge/text.hpp"

namespace forge::wikidata {

struct Claim {
  std::string pid;
  std::string object_qid;

  bool operator==(const Claim&) const = default;
};

struct EntityRecord {
  std::string qid;
  std::optional<std::string> label;
  std::optional<std::string> description;
  std::vector<std::string> aliases;
  std::vector<std::string> instance_of;
  std::vector<std::string> subclass_of;
  std::uint64_t sitelink_count = 0;
  // Title of the page on the configured Wikipedia (e.g. enwiki).
  std::optional<std::string> wiki_title;
  std::vector<Claim> claims;

  bool operator==(const EntityRecord&) const = default;
};

struct PropertyRecord {
  std::string pid;
  std::string label;

  bool operator==(const PropertyRecord&) const = default;
};

// Immutable once built; safe to share across threads for reading.
class Ontology {
 public:
  using EntityMap = std::map<std::string, EntityRecord, text::IdLess>;
  using PropertyMap = std::map<std::string, PropertyRecord, text::IdLess>;

  // Inserts or replaces; keeps the title index in sync.
  void add_entity(EntityRecord record);
  void add_property(PropertyRecord record);

  // Throws Error if a date was already set.
  void set_snapshot_date(Date date);
  const std::optional<Date>& snapshot_date() const { return snapshot_date_; }

  const EntityMap& entities() const { return entities_; }
  const PropertyMap& properties() const { return properties_; }
  const std::map<std::string, std::string>& title_index() const { return title_index_; }

  const EntityRecord* find(std::string_view qid) const;
  const EntityRecord& at(std::string_view qid) const;  // throws LookupError
  const PropertyRecord* find_property(std::string_view pid) const;
  std::optional<std::string> qid_for_title(std::string_view normalized_title) const;

  bool contains(std::string_view qid) const { return find(qid) != nullptr; }
  std::size_t size() const { return entities_.size(); }

  bool operator==(const Ontology&) const = default;

 private:
  EntityMap entities_;
  PropertyMap properties_;
  std::map<std::string, std::string> title_index_;
  std::map<std::string, bool> title_origin_;  // key came from a sitelink
  std::optional<Date> snapshot_date_;
};

struct IngestOptions {
  std::string language = "en";
  std::string type_property = "P31";
  std::string hierarchy_property = "P279";
  // When set, only these qids are retained. Properties are always kept.
  std::optional<std::unordered_set<std::string>> allowlist;
  std::optional<Date> snapshot_date;
};

struct SkippedLine {
  std::size_t line_number = 0;  // 1-based
  std::string reason;
};

struct IngestReport {
  std::size_t lines_read = 0;
  std::size_t entities_kept = 0;
  std::size_t properties_kept = 0;
  std::size_t filtered_out = 0;
  std::vector<SkippedLine> skipped;
};

// Streams a Wikidata JSON dump (one entity per line, optional surrounding
// array brackets and trailing commas). Malformed lines land in
// `report.skipped`; an unreadable stream throws IngestError.
Ontology parse_wikidata_dump(std::istream& in, const IngestOptions& options,
                             IngestReport* report = nullptr);

// Parses a single dump line into an entity or property. Returns false for
// lines that carry neither (blank, brackets). Throws Error on malformed JSON.
struct ParsedLine {
  std::optional<EntityRecord> entity;
  std::optional<PropertyRecord> property;
};
ParsedLine parse_dump_line(std::string_view line, const IngestOptions& options);

// Canonical title falls back to the wiki page title when the label is
// missing. Type targets that are absent or unlabeled are dropped with a
// warning. Throws LookupError if `qid` is absent.
EntityProfile resolve_entity_profile(std::string_view qid, const Ontology& ontology);

// Direct P279 parents of a type. Throws LookupError if absent.
std::vector<std::string> abstract_types_of(std::string_view base_type_qid,
                                           const Ontology& ontology);

// Descending sitelink count, ties broken by ascending numeric qid.
std::vector<std::string> importance_rank(std::vector<std::string> qids,
                                         const Ontology& ontology);

// True if `a` ranks strictly before `b` under importance_rank's ordering.
bool more_important(const EntityRecord& a, const EntityRecord& b);

// JSONL snapshot: header line with snapshot_date, then one record per line.
void write_snapshot(const Ontology& ontology, std::ostream& out);
Ontology read_snapshot(std::istream& in);
Ontology load_snapshot(const std::filesystem::path& path);

}  // namespace forge::wikidata

#endif  // FORGE_WIKIDATA_HPP_
