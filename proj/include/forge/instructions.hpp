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

#ifndef FORGE_INSTRUCTIONS_HPP_
#define FORGE_INSTRUCTIONS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/align.hpp"
#include "forge/random.hpp"
#include "forge/wikidata.hpp"
#include "json.hpp"

namespace forge::instructions {

enum class Category : std::uint8_t {
  kDefault,
  kBaseType,
  kAbstractType,
  kDescription,
  kImportance,
  kNumber,
  kNumberBaseType,
  kNumberAbstractType,
};

inline constexpr std::array<Category, 8> kAllCategories = {
    Category::kDefault,     Category::kBaseType,   Category::kAbstractType,
    Category::kDescription, Category::kImportance, Category::kNumber,
    Category::kNumberBaseType, Category::kNumberAbstractType};

// Categories the second training sample is drawn from.
inline constexpr std::array<Category, 5> kTrainingDrawCategories = {
    Category::kBaseType, Category::kAbstractType, Category::kDescription,
    Category::kImportance, Category::kNumber};

std::string_view category_name(Category c);           // "BaseType"
std::string_view category_display_name(Category c);   // "Base Type"
// Accepts either form, case-insensitively, with or without spaces/'+'.
std::optional<Category> parse_category(std::string_view s);

bool takes_types(Category c);
bool takes_descriptions(Category c);
bool takes_number(Category c);
bool is_type_category(Category c);    // BaseType/AbstractType and crosses
bool is_abstract(Category c);
bool is_cross(Category c);

enum class Origin : std::uint8_t { kManual, kRephrased };
std::string_view origin_name(Origin o);

struct InstructionTemplate {
  Category category = Category::kDefault;
  std::string text_singular;
  std::string text_plural;
  Origin origin = Origin::kManual;
};

class TemplatePool {
 public:
  void add(InstructionTemplate t);  // validates placeholders
  const std::vector<InstructionTemplate>& of(Category c) const;
  std::size_t size(Category c) const { return of(c).size(); }
  std::size_t total() const;
  std::map<Category, std::size_t> counts() const;

 private:
  std::map<Category, std::vector<InstructionTemplate>> pools_;
};

// Validates that `text` uses exactly the placeholders `category` requires
// ({num} and {number} are synonyms). Returns an error message or empty.
std::string check_placeholders(Category category, std::string_view text);

// TSV (category, singular, plural, origin) or JSONL with the same keys.
// Lines starting with '#' and a leading header row are ignored in TSV.
// Throws TemplateError naming the offending line.
TemplatePool load_templates(std::istream& in, bool jsonl);
TemplatePool load_templates(const std::filesystem::path& path);

struct InstructionSpec {
  Category category = Category::kDefault;
  std::vector<std::string> types;      // labels shown in the instruction
  std::vector<std::string> type_qids;  // parallel to `types` when known
  std::vector<std::string> descriptions;
  std::optional<std::size_t> k;

  bool operator==(const InstructionSpec&) const = default;
};

// Empty when the spec carries exactly the parameters its category needs.
std::string check_spec(const InstructionSpec& spec);

// Throws InstantiationError on category or arity mismatch.
std::string instantiate(const InstructionTemplate& tmpl, const InstructionSpec& spec);

struct FilterResult {
  align::AnnotatedDocument document;
  // Kept mention indices into the source document, ascending.
  std::vector<std::size_t> kept;
  // k exceeded the number of mentions that survived the constraint.
  bool k_exceeded = false;
};

FilterResult filter_by_instruction(const align::AnnotatedDocument& document,
                                   const InstructionSpec& spec,
                                   const wikidata::Ontology& ontology);

// Keeps the given mention indices (ascending) and the triplets whose
// endpoints both survive, reindexed.
align::AnnotatedDocument restrict_mentions(const align::AnnotatedDocument& document,
                                           const std::vector<std::size_t>& kept);

struct InstructedSample {
  std::string sample_id;
  std::string doc_id;
  std::size_t run = 0;
  std::string instruction_text;
  std::string input_text;
  align::AnnotatedDocument target;
  InstructionSpec spec;
  Origin template_origin = Origin::kManual;
  std::size_t template_index = 0;
  bool k_exceeded = false;
};

struct AugmentOptions {
  std::size_t min_arity = 1;
  std::size_t max_arity = 3;
};

// One Default sample plus one sample whose category is drawn uniformly from
// the training categories this document can support. Documents without
// mentions get only the Default sample.
std::vector<InstructedSample> augment_document(const align::AnnotatedDocument& document,
                                               const TemplatePool& pool,
                                               const wikidata::Ontology& ontology, Rng& rng,
                                               const AugmentOptions& options = {});

// Number+BaseType and Number+AbstractType samples (evaluation only).
// Documents without typed mentions yield nothing.
std::vector<InstructedSample> make_cross_instruction_samples(
    const align::AnnotatedDocument& document, const TemplatePool& pool,
    const wikidata::Ontology& ontology, Rng& rng, const AugmentOptions& options = {});

// Re-renders `sample` with `runs` templates drawn from its category's pool
// (distinct while the pool allows), setting run and sample_id suffixes.
std::vector<InstructedSample> rephrase_runs(const InstructedSample& sample,
                                            const TemplatePool& pool, std::size_t runs,
                                            Rng& rng);

nlohmann::json to_json(const InstructionSpec& spec);
InstructionSpec spec_from_json(const nlohmann::json& j);

// {sample_id, doc_id, run, category, instruction, input, output, spec,
//  mention_qids, template_origin, template_index, k_exceeded}; `output` is
// the linearised target.
nlohmann::json to_json(const InstructedSample& sample);

}  // namespace forge::instructions

#endif  // FORGE_INSTRUCTIONS_HPP_
