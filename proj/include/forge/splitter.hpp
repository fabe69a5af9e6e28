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

#ifndef FORGE_SPLITTER_HPP_
#define FORGE_SPLITTER_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "forge/date.hpp"
#include "forge/instructions.hpp"
#include "forge/wikidata.hpp"
#include "forge/wikipedia.hpp"
#include "json.hpp"

namespace forge::splitter {

enum class Partition : std::uint8_t { kSeen, kUnseen };
std::string_view partition_name(Partition p);
std::optional<Partition> parse_partition(std::string_view s);

struct SplitConfig {
  Date train_wikidata_date;
  Date train_wikipedia_date;
  Date eval_wikipedia_date;
  Date eval_wikidata_date;

  // Empty when every training date precedes every evaluation date.
  std::string validate() const;
};

// The evaluation articles whose page id never occurs in the training dump.
std::vector<wikipedia::ArticleRecord> build_open_world_corpus(
    const std::unordered_set<std::int64_t>& train_article_ids,
    std::vector<wikipedia::ArticleRecord> eval_articles);

Partition label_entity_partition(std::string_view qid, const wikidata::Ontology& train_ontology);

// Type labels and description strings used by the training instructions.
struct InstructionInventory {
  std::set<std::string> types;
  std::set<std::string> descriptions;

  void add(const instructions::InstructionSpec& spec);
};

// Unseen iff any content parameter is missing from the inventory.
Partition label_instruction_partition(const instructions::InstructionSpec& spec,
                                      const InstructionInventory& inventory);

// Sidecar row: one instruction label per sample, one entity label per gold
// mention in target order.
struct PartitionLabels {
  std::string sample_id;
  Partition instruction = Partition::kSeen;
  std::vector<Partition> entities;
};

PartitionLabels label_sample(std::string_view sample_id,
                             const instructions::InstructionSpec& spec,
                             const std::vector<std::string>& mention_qids,
                             const wikidata::Ontology& train_ontology,
                             const InstructionInventory& inventory);

nlohmann::json to_json(const PartitionLabels& labels);
PartitionLabels labels_from_json(const nlohmann::json& j);

}  // namespace forge::splitter

#endif  // FORGE_SPLITTER_HPP_
