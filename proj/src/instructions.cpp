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

#include "forge/instructions.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/linearizer.hpp"
#include "forge/log.hpp"
#include "forge/text.hpp"

namespace forge::instructions {

using align::AnnotatedDocument;
using nlohmann::json;

namespace {

struct CategoryNames {
  Category category;
  std::string_view name;
  std::string_view display;
};

constexpr CategoryNames kNames[] = {
    {Category::kDefault, "Default", "Default"},
    {Category::kBaseType, "BaseType", "Base Type"},
    {Category::kAbstractType, "AbstractType", "Abstract Type"},
    {Category::kDescription, "Description", "Description"},
    {Category::kImportance, "Importance", "Importance"},
    {Category::kNumber, "Number", "Number"},
    {Category::kNumberBaseType, "NumberBaseType", "Number+Base Type"},
    {Category::kNumberAbstractType, "NumberAbstractType", "Number+Abstract Type"},
};

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '+' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view category_name(Category c) {
  for (const auto& n : kNames) {
    if (n.category == c) return n.name;
  }
  return "?";
}

std::string_view category_display_name(Category c) {
  for (const auto& n : kNames) {
    if (n.category == c) return n.display;
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view s) {
  const std::string key = squash(s);
  for (const auto& n : kNames) {
    if (squash(n.name) == key) return n.category;
  }
  return std::nullopt;
}

bool takes_types(Category c) {
  return c == Category::kBaseType || c == Category::kAbstractType ||
         c == Category::kNumberBaseType || c == Category::kNumberAbstractType;
}
bool takes_descriptions(Category c) { return c == Category::kDescription; }
bool takes_number(Category c) {
  return c == Category::kImportance || c == Category::kNumber ||
         c == Category::kNumberBaseType || c == Category::kNumberAbstractType;
}
bool is_type_category(Category c) { return takes_types(c); }
bool is_abstract(Category c) {
  return c == Category::kAbstractType || c == Category::kNumberAbstractType;
}
bool is_cross(Category c) {
  return c == Category::kNumberBaseType || c == Category::kNumberAbstractType;
}

std::string_view origin_name(Origin o) { return o == Origin::kManual ? "manual" : "rephrased"; }

std::string check_placeholders(Category category, std::string_view text) {
  std::set<std::string> found;
  std::size_t i = 0;
  while ((i = text.find('{', i)) != std::string_view::npos) {
    const std::size_t close = text.find('}', i);
    if (close == std::string_view::npos) return "unterminated placeholder";
    std::string name(text.substr(i + 1, close - i - 1));
    if (name == "number") name = "num";
    if (name != "types" && name != "descriptions" && name != "num") {
      return "unknown placeholder {" + name + "}";
    }
    found.insert(name);
    i = close + 1;
  }
  std::set<std::string> required;
  if (takes_types(category)) required.insert("types");
  if (takes_descriptions(category)) required.insert("descriptions");
  if (takes_number(category)) required.insert("num");
  if (found == required) return {};
  for (const std::string& r : required) {
    if (!found.contains(r)) return "missing placeholder {" + r + "}";
  }
  for (const std::string& f : found) {
    if (!required.contains(f)) return "placeholder {" + f + "} not allowed";
  }
  return "placeholder mismatch";
}

void TemplatePool::add(InstructionTemplate t) {
  if (t.text_plural.empty()) t.text_plural = t.text_singular;
  for (const std::string* s : {&t.text_singular, &t.text_plural}) {
    if (text::trim(*s).empty()) throw TemplateError("empty template text");
    if (std::string err = check_placeholders(t.category, *s); !err.empty()) {
      throw TemplateError(std::string(category_name(t.category)) + " template \"" + *s + "\": " + err);
    }
  }
  pools_[t.category].push_back(std::move(t));
}

const std::vector<InstructionTemplate>& TemplatePool::of(Category c) const {
  static const std::vector<InstructionTemplate> kEmpty;
  auto it = pools_.find(c);
  return it == pools_.end() ? kEmpty : it->second;
}

std::size_t TemplatePool::total() const {
  std::size_t n = 0;
  for (const auto& [c, v] : pools_) n += v.size();
  return n;
}

std::map<Category, std::size_t> TemplatePool::counts() const {
  std::map<Category, std::size_t> out;
  for (const auto& [c, v] : pools_) out[c] = v.size();
  return out;
}

namespace {

Origin parse_origin(std::string_view s, std::size_t line) {
  const std::string o = text::to_lower_ascii(text::trim(s));
  if (o.empty() || o == "manual") return Origin::kManual;
  if (o == "rephrased") return Origin::kRephrased;
  throw TemplateError("line " + std::to_string(line) + ": unknown origin '" + std::string(s) + "'");
}

void add_row(TemplatePool& pool, std::size_t line, std::string_view category, std::string singular,
             std::string plural, std::string_view origin) {
  auto cat = parse_category(text::trim(category));
  if (!cat) {
    throw TemplateError("line " + std::to_string(line) + ": unknown category '" +
                        std::string(category) + "'");
  }
  try {
    pool.add({*cat, std::move(singular), std::move(plural), parse_origin(origin, line)});
  } catch (const TemplateError& e) {
    throw TemplateError("line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

TemplatePool load_templates(std::istream& in, bool jsonl) {
  TemplatePool pool;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (jsonl) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw TemplateError("line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!j.is_object() || !j.contains("category") || !j.contains("singular")) {
        throw TemplateError("line " + std::to_string(line_no) + ": expected {category, singular, ...}");
      }
      add_row(pool, line_no, j["category"].get<std::string>(), j["singular"].get<std::string>(),
              j.value("plural", ""), j.value("origin", "manual"));
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cols = text::split(line, '\t');
    if (first_row && text::to_lower_ascii(text::trim(cols[0])) == "category") {
      first_row = false;
      continue;
    }
    first_row = false;
    if (cols.size() < 2) {
      throw TemplateError("line " + std::to_string(line_no) + ": expected category<TAB>singular[<TAB>plural<TAB>origin]");
    }
    add_row(pool, line_no, cols[0], cols[1], cols.size() > 2 ? cols[2] : "",
            cols.size() > 3 ? cols[3] : "");
  }
  return pool;
}

TemplatePool load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open template file '" + path.string() + "'");
  const std::string ext = path.extension().string();
  return load_templates(in, ext == ".jsonl" || ext == ".json");
}

std::string check_spec(const InstructionSpec& spec) {
  const Category c = spec.category;
  if (takes_types(c) != !spec.types.empty()) {
    return takes_types(c) ? "types required" : "types not allowed";
  }
  if (!spec.type_qids.empty() && spec.type_qids.size() != spec.types.size()) {
    return "type_qids must parallel types";
  }
  if (takes_descriptions(c) != !spec.descriptions.empty()) {
    return takes_descriptions(c) ? "descriptions required" : "descriptions not allowed";
  }
  if (takes_number(c) != spec.k.has_value()) return takes_number(c) ? "k required" : "k not allowed";
  if (spec.k && *spec.k < 1) return "k must be at least 1";
  return {};
}

std::string instantiate(const InstructionTemplate& tmpl, const InstructionSpec& spec) {
  if (tmpl.category != spec.category) {
    throw InstantiationError("template category " + std::string(category_name(tmpl.category)) +
                             " does not match spec category " +
                             std::string(category_name(spec.category)));
  }
  if (std::string err = check_spec(spec); !err.empty()) {
    throw InstantiationError(std::string(category_name(spec.category)) + " spec: " + err);
  }
  bool singular = true;
  if (takes_number(spec.category)) {
    singular = *spec.k == 1;
  } else if (takes_types(spec.category)) {
    singular = spec.types.size() == 1;
  } else if (takes_descriptions(spec.category)) {
    singular = spec.descriptions.size() == 1;
  }
  const std::string& text = singular ? tmpl.text_singular : tmpl.text_plural;
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const std::size_t close = text.find('}', i);
      const std::string name = text.substr(i + 1, close - i - 1);
      if (name == "types") {
        out += text::join_with_and(spec.types);
      } else if (name == "descriptions") {
        out += text::join_with_and(spec.descriptions);
      } else {
        out += std::to_string(*spec.k);
      }
      i = close + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

AnnotatedDocument restrict_mentions(const AnnotatedDocument& document,
                                    const std::vector<std::size_t>& kept) {
  AnnotatedDocument out;
  out.doc_id = document.doc_id;
  out.text = document.text;
  std::vector<std::size_t> new_index(document.mentions.size(), SIZE_MAX);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    new_index[kept[i]] = i;
    out.mentions.push_back(document.mentions[kept[i]]);
  }
  for (const align::RelationTriplet& t : document.triplets) {
    if (new_index[t.head_idx] == SIZE_MAX || new_index[t.tail_idx] == SIZE_MAX) continue;
    out.triplets.push_back({new_index[t.head_idx], new_index[t.tail_idx], t.relations});
  }
  return out;
}

namespace {

bool intersects(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (const std::string& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  }
  return false;
}

std::vector<std::string> folded(const std::vector<std::string>& v) {
  std::vector<std::string> out;
  for (const std::string& s : v) out.push_back(text::fold(s));
  return out;
}

bool matches_base_type(const align::MentionAnnotation& m, const InstructionSpec& spec) {
  if (!spec.type_qids.empty()) return intersects(m.profile.type_qids, spec.type_qids);
  return intersects(folded(m.profile.types), folded(spec.types));
}

bool matches_abstract_type(const align::MentionAnnotation& m, const InstructionSpec& spec,
                           const wikidata::Ontology& ontology) {
  const std::vector<std::string> wanted_labels = folded(spec.types);
  for (const std::string& base : m.profile.type_qids) {
    const wikidata::EntityRecord* rec = ontology.find(base);
    if (rec == nullptr) continue;
    for (const std::string& parent : rec->subclass_of) {
      if (!spec.type_qids.empty()) {
        if (std::find(spec.type_qids.begin(), spec.type_qids.end(), parent) != spec.type_qids.end()) {
          return true;
        }
        continue;
      }
      const wikidata::EntityRecord* p = ontology.find(parent);
      if (p && p->label &&
          std::find(wanted_labels.begin(), wanted_labels.end(), text::fold(*p->label)) !=
              wanted_labels.end()) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

FilterResult filter_by_instruction(const AnnotatedDocument& document, const InstructionSpec& spec,
                                   const wikidata::Ontology& ontology) {
  if (std::string err = check_spec(spec); !err.empty()) {
    throw InstantiationError(std::string(category_name(spec.category)) + " spec: " + err);
  }
  const auto& mentions = document.mentions;
  std::vector<std::size_t> candidates;
  switch (spec.category) {
    case Category::kDefault:
    case Category::kNumber:
    case Category::kImportance:
      for (std::size_t i = 0; i < mentions.size(); ++i) candidates.push_back(i);
      break;
    case Category::kBaseType:
    case Category::kNumberBaseType:
      for (std::size_t i = 0; i < mentions.size(); ++i) {
        if (matches_base_type(mentions[i], spec)) candidates.push_back(i);
      }
      break;
    case Category::kAbstractType:
    case Category::kNumberAbstractType:
      for (std::size_t i = 0; i < mentions.size(); ++i) {
        if (matches_abstract_type(mentions[i], spec, ontology)) candidates.push_back(i);
      }
      break;
    case Category::kDescription:
      for (std::size_t i = 0; i < mentions.size(); ++i) {
        const auto& d = mentions[i].profile.description;
        if (d && std::find(spec.descriptions.begin(), spec.descriptions.end(), *d) !=
                     spec.descriptions.end()) {
          candidates.push_back(i);
        }
      }
      break;
  }

  FilterResult result;
  if (spec.k) {
    const std::size_t k = *spec.k;
    result.k_exceeded = k > candidates.size();
    if (spec.category == Category::kImportance) {
      // Mentions ranked by their entity's importance; document order breaks ties.
      std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        const auto* ra = ontology.find(mentions[a].profile.qid);
        const auto* rb = ontology.find(mentions[b].profile.qid);
        if (ra == nullptr || rb == nullptr) return ra != nullptr && rb == nullptr;
        if (ra->qid == rb->qid) return false;
        return wikidata::more_important(*ra, *rb);
      });
    }
    if (candidates.size() > k) candidates.resize(k);
    std::sort(candidates.begin(), candidates.end());
  }
  result.kept = candidates;
  result.document = restrict_mentions(document, candidates);
  return result;
}

// ---------------------------------------------------------------------------
// Augmentation

namespace {

struct TypeChoice {
  std::string qid;
  std::string label;
};

// Distinct base types of the document in order of first appearance.
std::vector<TypeChoice> document_types(const AnnotatedDocument& doc) {
  std::vector<TypeChoice> out;
  std::set<std::string> seen;
  for (const auto& m : doc.mentions) {
    for (std::size_t i = 0; i < m.profile.type_qids.size(); ++i) {
      if (seen.insert(m.profile.type_qids[i]).second) {
        out.push_back({m.profile.type_qids[i], m.profile.types[i]});
      }
    }
  }
  return out;
}

// Labelled direct parents of a base type.
std::vector<TypeChoice> labelled_parents(const std::string& base, const wikidata::Ontology& onto) {
  std::vector<TypeChoice> out;
  const wikidata::EntityRecord* rec = onto.find(base);
  if (rec == nullptr) return out;
  for (const std::string& parent : rec->subclass_of) {
    const wikidata::EntityRecord* p = onto.find(parent);
    if (p && p->label && !p->label->empty()) out.push_back({parent, *p->label});
  }
  return out;
}

std::vector<TypeChoice> abstractable_types(const AnnotatedDocument& doc, const wikidata::Ontology& onto) {
  std::vector<TypeChoice> out;
  for (const TypeChoice& t : document_types(doc)) {
    if (!labelled_parents(t.qid, onto).empty()) out.push_back(t);
  }
  return out;
}

std::vector<std::string> document_descriptions(const AnnotatedDocument& doc) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& m : doc.mentions) {
    if (m.profile.description && !m.profile.description->empty() &&
        seen.insert(*m.profile.description).second) {
      out.push_back(*m.profile.description);
    }
  }
  return out;
}

std::size_t draw_arity(Rng& rng, std::size_t available, const AugmentOptions& opt) {
  const std::size_t hi = std::min(opt.max_arity, available);
  const std::size_t lo = std::min(std::max<std::size_t>(opt.min_arity, 1), hi);
  return static_cast<std::size_t>(uniform_between(rng, lo, hi));
}

template <typename T>
std::vector<T> draw_subset(Rng& rng, const std::vector<T>& items, const AugmentOptions& opt) {
  const std::size_t n = draw_arity(rng, items.size(), opt);
  std::vector<T> out;
  for (std::size_t i : sample_without_replacement(rng, items.size(), n)) out.push_back(items[i]);
  return out;
}

void set_types(InstructionSpec& spec, const std::vector<TypeChoice>& types) {
  for (const TypeChoice& t : types) {
    if (std::find(spec.type_qids.begin(), spec.type_qids.end(), t.qid) != spec.type_qids.end()) continue;
    spec.type_qids.push_back(t.qid);
    spec.types.push_back(t.label);
  }
}

// One uniformly drawn parent per chosen base type.
std::vector<TypeChoice> draw_abstract_types(Rng& rng, const std::vector<TypeChoice>& bases,
                                            const wikidata::Ontology& onto, const AugmentOptions& opt) {
  std::vector<TypeChoice> out;
  for (const TypeChoice& base : draw_subset(rng, bases, opt)) {
    const std::vector<TypeChoice> parents = labelled_parents(base.qid, onto);
    out.push_back(parents[uniform_index(rng, parents.size())]);
  }
  return out;
}

InstructedSample render(const AnnotatedDocument& doc, InstructionSpec spec, const TemplatePool& pool,
                        const wikidata::Ontology& onto, Rng& rng) {
  const auto& templates = pool.of(spec.category);
  if (templates.empty()) {
    throw AugmentError("no templates for category " + std::string(category_name(spec.category)));
  }
  const std::size_t t = uniform_index(rng, templates.size());
  InstructedSample s;
  s.doc_id = doc.doc_id;
  s.sample_id = doc.doc_id + "/" + std::string(category_name(spec.category));
  s.instruction_text = instantiate(templates[t], spec);
  s.input_text = doc.text;
  FilterResult filtered = filter_by_instruction(doc, spec, onto);
  s.target = std::move(filtered.document);
  s.k_exceeded = filtered.k_exceeded;
  s.template_origin = templates[t].origin;
  s.template_index = t;
  s.spec = std::move(spec);
  return s;
}

}  // namespace

std::vector<InstructedSample> augment_document(const AnnotatedDocument& document,
                                               const TemplatePool& pool,
                                               const wikidata::Ontology& ontology, Rng& rng,
                                               const AugmentOptions& options) {
  std::vector<InstructedSample> out;
  out.push_back(render(document, InstructionSpec{Category::kDefault, {}, {}, {}, {}}, pool, ontology, rng));
  if (document.mentions.empty()) return out;

  const std::vector<TypeChoice> types = document_types(document);
  const std::vector<TypeChoice> abstractable = abstractable_types(document, ontology);
  const std::vector<std::string> descriptions = document_descriptions(document);

  std::vector<Category> eligible;
  for (Category c : kTrainingDrawCategories) {
    if (c == Category::kBaseType && types.empty()) continue;
    if (c == Category::kAbstractType && abstractable.empty()) continue;
    if (c == Category::kDescription && descriptions.empty()) continue;
    eligible.push_back(c);
  }
  const Category category = eligible[uniform_index(rng, eligible.size())];

  InstructionSpec spec;
  spec.category = category;
  switch (category) {
    case Category::kBaseType:
      set_types(spec, draw_subset(rng, types, options));
      break;
    case Category::kAbstractType:
      set_types(spec, draw_abstract_types(rng, abstractable, ontology, options));
      break;
    case Category::kDescription:
      spec.descriptions = draw_subset(rng, descriptions, options);
      break;
    case Category::kImportance:
    case Category::kNumber:
      spec.k = uniform_between(rng, 1, document.mentions.size());
      break;
    default:
      break;
  }
  out.push_back(render(document, std::move(spec), pool, ontology, rng));
  return out;
}

std::vector<InstructedSample> make_cross_instruction_samples(const AnnotatedDocument& document,
                                                             const TemplatePool& pool,
                                                             const wikidata::Ontology& ontology,
                                                             Rng& rng, const AugmentOptions& options) {
  std::vector<InstructedSample> out;
  const std::vector<TypeChoice> types = document_types(document);
  if (types.empty()) {
    log::info("document " + document.doc_id + " has no typed mention; no cross-instruction sample");
    return out;
  }
  for (Category c : {Category::kNumberBaseType, Category::kNumberAbstractType}) {
    InstructionSpec spec;
    spec.category = c;
    if (c == Category::kNumberBaseType) {
      set_types(spec, draw_subset(rng, types, options));
    } else {
      const std::vector<TypeChoice> abstractable = abstractable_types(document, ontology);
      if (abstractable.empty()) continue;
      set_types(spec, draw_abstract_types(rng, abstractable, ontology, options));
    }
    // k is drawn from [1, number of mentions satisfying the type constraint].
    InstructionSpec all = spec;
    all.k = document.mentions.size();
    const std::size_t available = filter_by_instruction(document, all, ontology).kept.size();
    if (available == 0) continue;
    spec.k = uniform_between(rng, 1, available);
    out.push_back(render(document, std::move(spec), pool, ontology, rng));
  }
  return out;
}

std::vector<InstructedSample> rephrase_runs(const InstructedSample& sample, const TemplatePool& pool,
                                            std::size_t runs, Rng& rng) {
  const auto& templates = pool.of(sample.spec.category);
  if (templates.empty()) {
    throw AugmentError("no templates for category " + std::string(category_name(sample.spec.category)));
  }
  std::vector<std::size_t> picks;
  if (templates.size() >= runs) {
    picks = sample_without_replacement(rng, templates.size(), runs);
  } else {
    for (std::size_t r = 0; r < runs; ++r) picks.push_back(uniform_index(rng, templates.size()));
  }
  std::vector<InstructedSample> out;
  for (std::size_t r = 0; r < runs; ++r) {
    InstructedSample s = sample;
    s.run = r;
    s.sample_id = sample.sample_id + "@r" + std::to_string(r);
    s.template_index = picks[r];
    s.template_origin = templates[picks[r]].origin;
    s.instruction_text = instantiate(templates[picks[r]], sample.spec);
    out.push_back(std::move(s));
  }
  return out;
}

json to_json(const InstructionSpec& spec) {
  json j;
  j["category"] = category_name(spec.category);
  if (!spec.types.empty()) j["types"] = spec.types;
  if (!spec.type_qids.empty()) j["type_qids"] = spec.type_qids;
  if (!spec.descriptions.empty()) j["descriptions"] = spec.descriptions;
  if (spec.k) j["k"] = *spec.k;
  return j;
}

InstructionSpec spec_from_json(const json& j) {
  InstructionSpec spec;
  const std::string name = j.at("category").get<std::string>();
  auto cat = parse_category(name);
  if (!cat) throw Error("unknown instruction category '" + name + "'");
  spec.category = *cat;
  spec.types = j.value("types", std::vector<std::string>{});
  spec.type_qids = j.value("type_qids", std::vector<std::string>{});
  spec.descriptions = j.value("descriptions", std::vector<std::string>{});
  if (j.contains("k") && !j["k"].is_null()) spec.k = j["k"].get<std::size_t>();
  return spec;
}

json to_json(const InstructedSample& s) {
  json qids = json::array();
  for (const auto& m : s.target.mentions) qids.push_back(m.profile.qid);
  json j;
  j["sample_id"] = s.sample_id;
  j["doc_id"] = s.doc_id;
  j["run"] = s.run;
  j["category"] = category_name(s.spec.category);
  j["instruction"] = s.instruction_text;
  j["input"] = s.input_text;
  j["output"] = linearizer::serialize(s.target);
  j["spec"] = to_json(s.spec);
  j["mention_qids"] = std::move(qids);
  j["template_origin"] = origin_name(s.template_origin);
  j["template_index"] = s.template_index;
  j["k_exceeded"] = s.k_exceeded;
  return j;
}

}  // namespace forge::instructions
