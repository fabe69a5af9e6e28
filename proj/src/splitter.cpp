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

#include "forge/splitter.hpp"

#include <algorithm>

#include "forge/error.hpp"

namespace forge::splitter {

std::string_view partition_name(Partition p) { return p == Partition::kSeen ? "seen" : "unseen"; }

std::optional<Partition> parse_partition(std::string_view s) {
  if (s == "seen") return Partition::kSeen;
  if (s == "unseen") return Partition::kUnseen;
  return std::nullopt;
}

std::string SplitConfig::validate() const {
  const std::chrono::sys_days latest_train =
      std::max(std::chrono::sys_days{train_wikidata_date}, std::chrono::sys_days{train_wikipedia_date});
  const std::chrono::sys_days earliest_eval =
      std::min(std::chrono::sys_days{eval_wikidata_date}, std::chrono::sys_days{eval_wikipedia_date});
  if (!(latest_train < earliest_eval)) {
    return "training dumps (" + format_date(train_wikidata_date) + ", " +
           format_date(train_wikipedia_date) + ") must predate evaluation dumps (" +
           format_date(eval_wikipedia_date) + ", " + format_date(eval_wikidata_date) + ")";
  }
  return {};
}

std::vector<wikipedia::ArticleRecord> build_open_world_corpus(
    const std::unordered_set<std::int64_t>& train_article_ids,
    std::vector<wikipedia::ArticleRecord> eval_articles) {
  std::erase_if(eval_articles, [&](const wikipedia::ArticleRecord& a) {
    return train_article_ids.contains(a.page_id);
  });
  return eval_articles;
}

Partition label_entity_partition(std::string_view qid, const wikidata::Ontology& train_ontology) {
  return train_ontology.contains(qid) ? Partition::kSeen : Partition::kUnseen;
}

void InstructionInventory::add(const instructions::InstructionSpec& spec) {
  types.insert(spec.types.begin(), spec.types.end());
  descriptions.insert(spec.descriptions.begin(), spec.descriptions.end());
}

Partition label_instruction_partition(const instructions::InstructionSpec& spec,
                                      const InstructionInventory& inventory) {
  for (const std::string& t : spec.types) {
    if (!inventory.types.contains(t)) return Partition::kUnseen;
  }
  for (const std::string& d : spec.descriptions) {
    if (!inventory.descriptions.contains(d)) return Partition::kUnseen;
  }
  return Partition::kSeen;
}

PartitionLabels label_sample(std::string_view sample_id, const instructions::InstructionSpec& spec,
                             const std::vector<std::string>& mention_qids,
                             const wikidata::Ontology& train_ontology,
                             const InstructionInventory& inventory) {
  PartitionLabels labels;
  labels.sample_id = std::string(sample_id);
  labels.instruction = label_instruction_partition(spec, inventory);
  for (const std::string& qid : mention_qids) {
    labels.entities.push_back(label_entity_partition(qid, train_ontology));
  }
  return labels;
}

nlohmann::json to_json(const PartitionLabels& labels) {
  nlohmann::json entities = nlohmann::json::array();
  for (Partition p : labels.entities) entities.push_back(partition_name(p));
  return {{"sample_id", labels.sample_id},
          {"instruction_partition", partition_name(labels.instruction)},
          {"entity_partitions", std::move(entities)}};
}

PartitionLabels labels_from_json(const nlohmann::json& j) {
  PartitionLabels labels;
  labels.sample_id = j.at("sample_id").get<std::string>();
  auto instr = parse_partition(j.at("instruction_partition").get<std::string>());
  if (!instr) throw Error("bad instruction_partition for " + labels.sample_id);
  labels.instruction = *instr;
  for (const auto& e : j.at("entity_partitions")) {
    auto p = parse_partition(e.get<std::string>());
    if (!p) throw Error("bad entity partition for " + labels.sample_id);
    labels.entities.push_back(*p);
  }
  return labels;
}

}  // namespace forge::splitter
