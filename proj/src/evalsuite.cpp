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

#include "forge/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>
#include <tuple>
#include <unordered_map>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge::eval {

using instructions::Category;
using linearizer::TargetEntity;
using splitter::Partition;

// ---------------------------------------------------------------------------
// ROUGE-L

Tokens tokenize(std::string_view s) {
  Tokens out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      cur.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto l = static_cast<double>(lcs_length(candidate, reference));
  const auto c = static_cast<double>(candidate.size());
  const auto r = static_cast<double>(reference.size());
  RougeScore s;
  s.precision = l / c;
  s.recall = l / r;
  // 2PR/(P+R) simplified to avoid rounding in the division chain.
  s.f1 = l == 0.0 ? 0.0 : 2.0 * l / (c + r);
  return s;
}

double rouge_l_f1(const Tokens& candidate, const Tokens& reference) {
  return rouge_l(candidate, reference).f1;
}

double rouge_l_f1(std::string_view candidate, std::string_view reference) {
  return rouge_l_f1(tokenize(candidate), tokenize(reference));
}

double harmonic_mean(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  pred_credit += o.pred_credit;
  pred_total += o.pred_total;
  gold_credit += o.gold_credit;
  gold_total += o.gold_total;
  return *this;
}

Prf MatchCounts::prf() const {
  if (pred_total == 0 && gold_total == 0) return {1.0, 1.0, 1.0};
  Prf p;
  p.precision = pred_total > 0 ? pred_credit / static_cast<double>(pred_total) : 0.0;
  p.recall = gold_total > 0 ? gold_credit / static_cast<double>(gold_total) : 0.0;
  p.f1 = harmonic_mean(p.precision, p.recall);
  return p;
}

MeanAccumulator& MeanAccumulator::operator+=(const MeanAccumulator& o) {
  sum += o.sum;
  count += o.count;
  return *this;
}

std::optional<double> MeanAccumulator::mean() const {
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Entity-level tasks

std::vector<std::pair<std::size_t, std::size_t>> match_mentions(const TargetObject& pred,
                                                                const TargetObject& gold) {
  std::unordered_map<std::string, std::deque<std::size_t>> free_gold;
  for (std::size_t g = 0; g < gold.entities.size(); ++g) free_gold[gold.entities[g].mention].push_back(g);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t p = 0; p < pred.entities.size(); ++p) {
    auto it = free_gold.find(pred.entities[p].mention);
    if (it == free_gold.end() || it->second.empty()) continue;
    pairs.emplace_back(p, it->second.front());
    it->second.pop_front();
  }
  return pairs;
}

MatchCounts score_mention_detection(const TargetObject& pred, const TargetObject& gold) {
  const double matched = static_cast<double>(match_mentions(pred, gold).size());
  return {matched, pred.entities.size(), matched, gold.entities.size()};
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> link_pairs(const TargetObject& pred,
                                                           const TargetObject& gold, double threshold) {
  std::vector<std::vector<double>> scores(pred.entities.size(),
                                          std::vector<double>(gold.entities.size(), -1.0));
  std::vector<Tokens> gold_titles;
  for (const TargetEntity& g : gold.entities) gold_titles.push_back(tokenize(g.title));
  for (std::size_t p = 0; p < pred.entities.size(); ++p) {
    const Tokens title = tokenize(pred.entities[p].title);
    for (std::size_t g = 0; g < gold.entities.size(); ++g) {
      if (pred.entities[p].mention != gold.entities[g].mention) continue;
      const double s = rouge_l_f1(title, gold_titles[g]);
      if (s >= threshold) scores[p][g] = s;
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (auto [p, g] : greedy_assignment(scores)) {
    if (scores[p][g] >= 0.0) out.emplace_back(p, g);
  }
  return out;
}

std::vector<std::string> folded_set(const std::vector<std::string>& v) {
  std::vector<std::string> out;
  for (const std::string& s : v) {
    std::string f = text::fold(s);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(std::move(f));
  }
  return out;
}

std::size_t overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  for (const std::string& x : a) n += std::find(b.begin(), b.end(), x) != b.end();
  return n;
}

template <typename Field>
MatchCounts score_string_lists(const TargetObject& pred, const TargetObject& gold, Field field) {
  MatchCounts c;
  for (const TargetEntity& e : pred.entities) c.pred_total += folded_set(field(e)).size();
  for (const TargetEntity& e : gold.entities) c.gold_total += folded_set(field(e)).size();
  for (auto [p, g] : match_mentions(pred, gold)) {
    const double hit = static_cast<double>(
        overlap(folded_set(field(pred.entities[p])), folded_set(field(gold.entities[g]))));
    c.pred_credit += hit;
    c.gold_credit += hit;
  }
  return c;
}

const std::vector<std::string>& types_of(const TargetEntity& e) { return e.type; }
const std::vector<std::string>& aliases_of(const TargetEntity& e) { return e.aliases; }

}  // namespace

MatchCounts score_entity_linking(const TargetObject& pred, const TargetObject& gold, double threshold) {
  const double matched = static_cast<double>(link_pairs(pred, gold, threshold).size());
  return {matched, pred.entities.size(), matched, gold.entities.size()};
}

MatchCounts score_entity_typing(const TargetObject& pred, const TargetObject& gold) {
  return score_string_lists(pred, gold, types_of);
}

MatchCounts score_aliases(const TargetObject& pred, const TargetObject& gold) {
  return score_string_lists(pred, gold, aliases_of);
}

MeanAccumulator score_description(const TargetObject& pred, const TargetObject& gold) {
  std::vector<std::optional<std::size_t>> pred_for_gold(gold.entities.size());
  for (auto [p, g] : match_mentions(pred, gold)) pred_for_gold[g] = p;
  MeanAccumulator acc;
  for (std::size_t g = 0; g < gold.entities.size(); ++g) {
    const auto& gd = gold.entities[g].description;
    if (!gd) continue;
    ++acc.count;
    if (!pred_for_gold[g]) continue;
    const auto& pd = pred.entities[*pred_for_gold[g]].description;
    if (pd) acc.sum += rouge_l_f1(*pd, *gd);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Open relation extraction

std::vector<FlatTriplet> flatten(const std::vector<linearizer::TargetTriplet>& triplets) {
  std::vector<FlatTriplet> out;
  for (const auto& t : triplets) {
    for (const std::string& r : t.relations) out.push_back({t.head, r, t.tail});
  }
  return out;
}

double triplet_match_score(const FlatTriplet& pred, const FlatTriplet& gold) {
  return (rouge_l_f1(pred.head, gold.head) + rouge_l_f1(pred.relation, gold.relation) +
          rouge_l_f1(pred.tail, gold.tail)) /
         3.0;
}

std::vector<std::pair<std::size_t, std::size_t>> greedy_assignment(
    const std::vector<std::vector<double>>& scores) {
  struct Cell {
    double score;
    std::size_t row, col;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    for (std::size_t c = 0; c < scores[r].size(); ++c) cells.push_back({scores[r][c], r, c});
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  std::vector<bool> row_used(scores.size(), false);
  std::vector<bool> col_used;
  for (const auto& row : scores) col_used.resize(std::max(col_used.size(), row.size()), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Cell& cell : cells) {
    if (row_used[cell.row] || col_used[cell.col]) continue;
    row_used[cell.row] = true;
    col_used[cell.col] = true;
    out.emplace_back(cell.row, cell.col);
  }
  return out;
}

namespace {

std::vector<std::vector<double>> triplet_scores(const std::vector<FlatTriplet>& pred,
                                                const std::vector<FlatTriplet>& gold, double threshold) {
  std::vector<std::vector<double>> s(pred.size(), std::vector<double>(gold.size(), 0.0));
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t g = 0; g < gold.size(); ++g) {
      const double v = triplet_match_score(pred[p], gold[g]);
      s[p][g] = v < threshold ? 0.0 : v;
    }
  }
  return s;
}

}  // namespace

MatchCounts score_open_re(const std::vector<FlatTriplet>& pred, const std::vector<FlatTriplet>& gold,
                          double match_threshold) {
  const auto scores = triplet_scores(pred, gold, match_threshold);
  MatchCounts c;
  c.pred_total = pred.size();
  c.gold_total = gold.size();
  for (const auto& row : scores) {
    if (!row.empty()) c.pred_credit += *std::max_element(row.begin(), row.end());
  }
  for (auto [p, g] : greedy_assignment(scores)) c.gold_credit += scores[p][g];
  return c;
}

MatchCounts score_open_re(const TargetObject& pred, const TargetObject& gold, double match_threshold) {
  return score_open_re(flatten(pred.triplets), flatten(gold.triplets), match_threshold);
}

// ---------------------------------------------------------------------------
// Partitions

std::string task_name(const TaskKey& key) {
  switch (key.task) {
    case Task::kMentionDetection: return "MD";
    case Task::kEntityLinking: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "EL(T=%g)", key.threshold);
      return buf;
    }
    case Task::kEntityTyping: return "ET";
    case Task::kOpenRe: return "OpenRE";
    case Task::kDescription: return "Desc";
    case Task::kAliases: return "Aliases";
  }
  return "?";
}

PartitionRecall& PartitionRecall::operator+=(const PartitionRecall& o) {
  by_partition[0] += o.by_partition[0];
  by_partition[1] += o.by_partition[1];
  return *this;
}

std::optional<double> PartitionRecall::recall(Partition p) const {
  return by_partition[static_cast<std::size_t>(p)].mean();
}

std::size_t PartitionRecall::denominator(Partition p) const {
  return by_partition[static_cast<std::size_t>(p)].count;
}

PartitionRecall partitioned_recall(const TargetObject& pred, const TargetObject& gold,
                                   const std::vector<Partition>& labels, const TaskKey& task,
                                   double match_threshold) {
  if (labels.size() != gold.entities.size()) {
    throw Error("partition labels (" + std::to_string(labels.size()) + ") do not cover gold mentions (" +
                std::to_string(gold.entities.size()) + ")");
  }
  PartitionRecall out;
  auto slot = [&](std::size_t g) -> MeanAccumulator& {
    return out.by_partition[static_cast<std::size_t>(labels[g])];
  };
  std::vector<std::optional<std::size_t>> pred_for_gold(gold.entities.size());
  auto fill = [&](const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    for (auto [p, g] : pairs) pred_for_gold[g] = p;
  };

  switch (task.task) {
    case Task::kMentionDetection:
    case Task::kEntityLinking:
      fill(task.task == Task::kMentionDetection ? match_mentions(pred, gold)
                                                : link_pairs(pred, gold, task.threshold));
      for (std::size_t g = 0; g < gold.entities.size(); ++g) {
        ++slot(g).count;
        if (pred_for_gold[g]) slot(g).sum += 1.0;
      }
      break;
    case Task::kEntityTyping:
    case Task::kAliases: {
      fill(match_mentions(pred, gold));
      const bool types = task.task == Task::kEntityTyping;
      for (std::size_t g = 0; g < gold.entities.size(); ++g) {
        const auto items = folded_set(types ? gold.entities[g].type : gold.entities[g].aliases);
        slot(g).count += items.size();
        if (!pred_for_gold[g]) continue;
        const TargetEntity& pe = pred.entities[*pred_for_gold[g]];
        slot(g).sum += static_cast<double>(overlap(folded_set(types ? pe.type : pe.aliases), items));
      }
      break;
    }
    case Task::kDescription:
      fill(match_mentions(pred, gold));
      for (std::size_t g = 0; g < gold.entities.size(); ++g) {
        const auto& gd = gold.entities[g].description;
        if (!gd) continue;
        ++slot(g).count;
        if (!pred_for_gold[g]) continue;
        const auto& pd = pred.entities[*pred_for_gold[g]].description;
        if (pd) slot(g).sum += rouge_l_f1(*pd, *gd);
      }
      break;
    case Task::kOpenRe: {
      // Endpoints resolve to the first gold entity with that surface.
      std::unordered_map<std::string, std::size_t> entity_of;
      for (std::size_t g = 0; g < gold.entities.size(); ++g) entity_of.emplace(gold.entities[g].mention, g);
      auto label_of = [&](const std::string& mention) {
        auto it = entity_of.find(mention);
        return it == entity_of.end() ? Partition::kSeen : labels[it->second];
      };
      const auto pflat = flatten(pred.triplets);
      const auto gflat = flatten(gold.triplets);
      const auto scores = triplet_scores(pflat, gflat, match_threshold);
      std::vector<double> credit(gflat.size(), 0.0);
      for (auto [p, g] : greedy_assignment(scores)) credit[g] = scores[p][g];
      for (std::size_t g = 0; g < gflat.size(); ++g) {
        const bool unseen = label_of(gflat[g].head) == Partition::kUnseen ||
                            label_of(gflat[g].tail) == Partition::kUnseen;
        MeanAccumulator& acc = out.by_partition[unseen ? 1 : 0];
        ++acc.count;
        acc.sum += credit[g];
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config, diagnostics and per-sample scoring

std::string EvalConfig::validate() const {
  if (title_thresholds.empty()) return "at least one title threshold is required";
  for (double t : title_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) return "title thresholds must lie in (0, 1]";
  }
  if (!std::is_sorted(title_thresholds.begin(), title_thresholds.end(), std::greater<>())) {
    return "title thresholds must be sorted descending";
  }
  if (rephrasing_runs < 1) return "rephrasing_runs must be at least 1";
  if (tokenizer != "lower-alnum") return "unknown tokenizer '" + tokenizer + "'";
  if (carb_match_threshold < 0.0 || carb_match_threshold > 1.0) return "carb_match_threshold must lie in [0, 1]";
  return {};
}

std::vector<TaskKey> EvalConfig::tasks() const {
  std::vector<TaskKey> out{{Task::kMentionDetection, 0.0}};
  for (double t : title_thresholds) out.push_back({Task::kEntityLinking, t});
  out.push_back({Task::kEntityTyping, 0.0});
  out.push_back({Task::kOpenRe, 0.0});
  out.push_back({Task::kDescription, 0.0});
  out.push_back({Task::kAliases, 0.0});
  return out;
}

GoldSample gold_from_json(const nlohmann::json& j) {
  GoldSample g;
  g.sample_id = j.at("sample_id").get<std::string>();
  g.run = j.value("run", std::size_t{0});
  g.spec = instructions::spec_from_json(j.at("spec"));
  g.mention_qids = j.value("mention_qids", std::vector<std::string>{});
  const auto outcome = linearizer::parse_and_validate(j.at("output").get<std::string>());
  if (const auto* ok = std::get_if<linearizer::Ok>(&outcome)) {
    g.target = ok->value;
  } else {
    throw Error("gold sample " + g.sample_id + " carries an invalid target");
  }
  if (!g.mention_qids.empty() && g.mention_qids.size() != g.target.entities.size()) {
    throw Error("gold sample " + g.sample_id + ": mention_qids do not align with entities");
  }
  return g;
}

Diagnostics diagnose(std::string_view raw_text, const instructions::InstructionSpec& spec,
                     const std::vector<std::string>& also_allowed) {
  Diagnostics d;
  d.json_error = !linearizer::is_ok(linearizer::parse_and_validate(raw_text, linearizer::Mode::kStrict));
  const auto lenient = linearizer::parse_and_validate(raw_text, linearizer::Mode::kLenient);
  const auto* ok = std::get_if<linearizer::Ok>(&lenient);
  if (ok == nullptr) return d;
  if (instructions::takes_number(spec.category) && spec.k) {
    d.number_checked = true;
    d.number_failed = ok->value.entities.size() != *spec.k;
  }
  if (instructions::is_type_category(spec.category)) {
    d.type_checked = true;
    std::vector<std::string> wanted = folded_set(spec.types);
    for (std::string& t : folded_set(also_allowed)) {
      if (std::find(wanted.begin(), wanted.end(), t) == wanted.end()) wanted.push_back(std::move(t));
    }
    for (const TargetEntity& e : ok->value.entities) {
      if (overlap(folded_set(e.type), wanted) == 0) {
        d.type_failed = true;
        break;
      }
    }
  }
  return d;
}

SampleScore score_sample(std::string_view raw_text, const GoldSample& gold,
                         const std::optional<splitter::PartitionLabels>& labels,
                         const EvalConfig& config) {
  SampleScore s;
  s.sample_id = gold.sample_id;
  s.category = gold.spec.category;
  s.run = gold.run;
  std::vector<std::string> base_types;
  if (instructions::is_abstract(gold.spec.category)) {
    for (const TargetEntity& e : gold.target.entities) base_types.insert(base_types.end(), e.type.begin(), e.type.end());
  }
  s.diagnostics = diagnose(raw_text, gold.spec, base_types);
  const auto outcome = linearizer::parse_and_validate(raw_text, config.parse_mode);
  const auto* ok = std::get_if<linearizer::Ok>(&outcome);
  s.parsed = ok != nullptr;
  const TargetObject empty;
  const TargetObject& pred = ok ? ok->value : empty;
  const TargetObject& g = gold.target;

  for (const TaskKey& key : config.tasks()) {
    MatchCounts c;
    switch (key.task) {
      case Task::kMentionDetection: c = score_mention_detection(pred, g); break;
      case Task::kEntityLinking: c = score_entity_linking(pred, g, key.threshold); break;
      case Task::kEntityTyping: c = score_entity_typing(pred, g); break;
      case Task::kOpenRe: c = score_open_re(pred, g, config.carb_match_threshold); break;
      case Task::kAliases: c = score_aliases(pred, g); break;
      case Task::kDescription: s.description = score_description(pred, g); continue;
    }
    // An unparseable output counts as one wrong prediction, so it scores
    // zero even against an empty gold target.
    if (!s.parsed) c.pred_total += 1;
    s.counts[key] = c;
  }
  if (labels) {
    s.instruction_partition = labels->instruction;
    for (const TaskKey& key : config.tasks()) {
      s.entity_partitions[key] = partitioned_recall(pred, g, labels->entities, key, config.carb_match_threshold);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

struct Stat {
  std::optional<double> mean, std;
};

Stat summarize(const std::vector<std::optional<double>>& values) {
  std::vector<double> v;
  for (const auto& x : values) {
    if (x) v.push_back(*x);
  }
  if (v.empty()) return {};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

struct Metrics {
  std::optional<double> p, r, f;
};

const std::vector<std::string>& partitions() {
  static const std::vector<std::string> kParts = {"all", "entity:seen", "entity:unseen",
                                                  "instruction:seen", "instruction:unseen"};
  return kParts;
}

bool in_partition(const SampleScore& s, const std::string& part) {
  if (part == "instruction:seen") return s.instruction_partition == Partition::kSeen;
  if (part == "instruction:unseen") return s.instruction_partition == Partition::kUnseen;
  if (part == "entity:seen" || part == "entity:unseen") return !s.entity_partitions.empty();
  return true;
}

// Metrics of one task over one group of samples.
std::optional<Metrics> group_metrics(const std::vector<const SampleScore*>& group, const TaskKey& key,
                                     const std::string& part) {
  std::vector<const SampleScore*> members;
  for (const SampleScore* s : group) {
    if (in_partition(*s, part)) members.push_back(s);
  }
  if (members.empty()) return std::nullopt;
  if (part == "entity:seen" || part == "entity:unseen") {
    const Partition p = part == "entity:seen" ? Partition::kSeen : Partition::kUnseen;
    PartitionRecall acc;
    for (const SampleScore* s : members) {
      auto it = s->entity_partitions.find(key);
      if (it != s->entity_partitions.end()) acc += it->second;
    }
    auto r = acc.recall(p);
    if (!r) return std::nullopt;
    return Metrics{std::nullopt, r, std::nullopt};
  }
  if (key.task == Task::kDescription) {
    MeanAccumulator acc;
    for (const SampleScore* s : members) acc += s->description;
    auto m = acc.mean();
    if (!m) return std::nullopt;
    return Metrics{std::nullopt, std::nullopt, m};
  }
  MatchCounts acc;
  for (const SampleScore* s : members) {
    auto it = s->counts.find(key);
    if (it != s->counts.end()) acc += it->second;
  }
  const Prf prf = acc.prf();
  return Metrics{prf.precision, prf.recall, prf.f1};
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> rate(std::size_t hits, std::size_t total) {
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

EvalReport aggregate_report(const std::vector<SampleScore>& scores, const EvalConfig& config) {
  EvalReport report;
  std::set<std::size_t> run_ids;
  std::set<Category> categories;
  for (const SampleScore& s : scores) {
    run_ids.insert(s.run);
    categories.insert(s.category);
  }
  report.runs = run_ids.size();
  const std::vector<std::size_t> runs(run_ids.begin(), run_ids.end());

  // group[run][category] -> samples
  std::map<std::size_t, std::map<Category, std::vector<const SampleScore*>>> groups;
  for (const SampleScore& s : scores) groups[s.run][s.category].push_back(&s);

  for (const TaskKey& key : config.tasks()) {
    const std::string task = task_name(key);
    for (const std::string& part : partitions()) {
      // per run: category -> metrics
      std::map<Category, std::vector<Metrics>> per_cat;
      std::map<Category, std::size_t> sample_counts;
      std::vector<Metrics> macro_per_run;
      bool any = false;
      for (std::size_t run : runs) {
        std::vector<std::optional<double>> ps, rs, fs;
        for (Category c : categories) {
          auto& group = groups[run][c];
          sample_counts[c] = std::max(sample_counts[c], group.size());
          auto m = group_metrics(group, key, part);
          if (!m) continue;
          any = true;
          per_cat[c].push_back(*m);
          ps.push_back(m->p);
          rs.push_back(m->r);
          fs.push_back(m->f);
        }
        macro_per_run.push_back({mean_of(ps), mean_of(rs), mean_of(fs)});
      }
      if (!any) continue;
      auto make_row = [&](std::string category, const std::vector<Metrics>& ms, std::size_t n) {
        std::vector<std::optional<double>> ps, rs, fs;
        for (const Metrics& m : ms) {
          ps.push_back(m.p);
          rs.push_back(m.r);
          fs.push_back(m.f);
        }
        const Stat sp = summarize(ps), sr = summarize(rs), sf = summarize(fs);
        ReportRow row;
        row.task = task;
        row.category = std::move(category);
        row.partition = part;
        row.precision = sp.mean;
        row.precision_std = sp.std;
        row.recall = sr.mean;
        row.recall_std = sr.std;
        row.f1 = sf.mean;
        row.f1_std = sf.std;
        row.samples = n;
        return row;
      };
      std::size_t total = 0;
      for (Category c : categories) {
        auto it = per_cat.find(c);
        if (it == per_cat.end()) continue;
        report.rows.push_back(make_row(std::string(instructions::category_display_name(c)), it->second,
                                       sample_counts[c]));
        total += sample_counts[c];
      }
      report.rows.push_back(make_row(std::string(kMacroAverage), macro_per_run, total));
    }
  }

  // Diagnostics
  std::map<Category, std::vector<std::array<std::optional<double>, 3>>> diag_runs;
  std::vector<std::array<std::optional<double>, 3>> macro_runs;
  for (std::size_t run : runs) {
    std::array<std::vector<std::optional<double>>, 3> cols;
    for (Category c : categories) {
      std::size_t n = 0, json_err = 0, num_n = 0, num_fail = 0, type_n = 0, type_fail = 0;
      for (const SampleScore* s : groups[run][c]) {
        ++n;
        json_err += s->diagnostics.json_error;
        num_n += s->diagnostics.number_checked;
        num_fail += s->diagnostics.number_failed;
        type_n += s->diagnostics.type_checked;
        type_fail += s->diagnostics.type_failed;
      }
      if (n == 0) continue;
      std::array<std::optional<double>, 3> r{rate(json_err, n), rate(num_fail, num_n), rate(type_fail, type_n)};
      diag_runs[c].push_back(r);
      for (std::size_t k = 0; k < 3; ++k) cols[k].push_back(r[k]);
    }
    macro_runs.push_back({mean_of(cols[0]), mean_of(cols[1]), mean_of(cols[2])});
  }
  auto diag_row = [](std::string category, const std::vector<std::array<std::optional<double>, 3>>& rs) {
    std::array<std::vector<std::optional<double>>, 3> cols;
    for (const auto& r : rs) {
      for (std::size_t k = 0; k < 3; ++k) cols[k].push_back(r[k]);
    }
    const Stat j = summarize(cols[0]), n = summarize(cols[1]), t = summarize(cols[2]);
    return DiagnosticRow{std::move(category), j.mean, n.mean, t.mean, j.std, n.std, t.std};
  };
  for (Category c : categories) {
    if (diag_runs.contains(c)) {
      report.diagnostics.push_back(diag_row(std::string(instructions::category_display_name(c)), diag_runs[c]));
    }
  }
  if (!categories.empty()) report.diagnostics.push_back(diag_row(std::string(kMacroAverage), macro_runs));
  return report;
}

std::vector<std::string> self_check(const EvalReport& report) {
  std::vector<std::string> problems;
  auto in_unit = [&](const std::string& where, const std::optional<double>& v) {
    if (v && (!(*v >= 0.0) || *v > 1.0 + 1e-12)) problems.push_back(where + " out of [0,1]");
  };
  std::map<std::pair<std::string, std::string>, std::vector<const ReportRow*>> by_table;
  for (const ReportRow& row : report.rows) {
    const std::string where = row.task + "/" + row.category + "/" + row.partition;
    in_unit(where + " precision", row.precision);
    in_unit(where + " recall", row.recall);
    in_unit(where + " f1", row.f1);
    by_table[{row.task, row.partition}].push_back(&row);
  }
  for (const auto& [key, rows] : by_table) {
    const ReportRow* macro = nullptr;
    std::vector<std::optional<double>> ps, rs, fs;
    for (const ReportRow* r : rows) {
      if (r->category == kMacroAverage) {
        macro = r;
        continue;
      }
      ps.push_back(r->precision);
      rs.push_back(r->recall);
      fs.push_back(r->f1);
    }
    if (macro == nullptr) continue;
    auto check = [&](const char* what, const std::optional<double>& got, const std::optional<double>& want) {
      if (got.has_value() != want.has_value() || (got && std::abs(*got - *want) > 1e-9)) {
        problems.push_back(key.first + "/" + key.second + " macro " + what + " is not the mean of its rows");
      }
    };
    check("precision", macro->precision, mean_of(ps));
    check("recall", macro->recall, mean_of(rs));
    check("f1", macro->f1, mean_of(fs));
  }
  for (const DiagnosticRow& d : report.diagnostics) {
    in_unit("diagnostics/" + d.category + " json_error_rate", d.json_error_rate);
    in_unit("diagnostics/" + d.category + " number_failure_rate", d.number_failure_rate);
    in_unit("diagnostics/" + d.category + " type_failure_rate", d.type_failure_rate);
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string fixed(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string percent_cell(const std::optional<double>& v, const std::optional<double>& sd) {
  if (!v) return "--";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f<sub>%.1f</sub>", 100.0 * *v, sd ? 100.0 * *sd : 0.0);
  return buf;
}

}  // namespace

void write_report_tsv(const EvalReport& report, std::ostream& out) {
  out << "task\tcategory\tpartition\tprecision\trecall\tf1\tprecision_std\trecall_std\tf1_std\tsamples\n";
  for (const ReportRow& r : report.rows) {
    out << r.task << '\t' << r.category << '\t' << r.partition << '\t' << fixed(r.precision) << '\t'
        << fixed(r.recall) << '\t' << fixed(r.f1) << '\t' << fixed(r.precision_std) << '\t'
        << fixed(r.recall_std) << '\t' << fixed(r.f1_std) << '\t' << r.samples << '\n';
  }
}

void write_diagnostics_tsv(const EvalReport& report, std::ostream& out) {
  out << "category\tjson_error_rate\tnumber_failure_rate\ttype_failure_rate\tjson_error_std\t"
         "number_failure_std\ttype_failure_std\n";
  for (const DiagnosticRow& d : report.diagnostics) {
    out << d.category << '\t' << fixed(d.json_error_rate) << '\t' << fixed(d.number_failure_rate) << '\t'
        << fixed(d.type_failure_rate) << '\t' << fixed(d.json_error_std) << '\t'
        << fixed(d.number_failure_std) << '\t' << fixed(d.type_failure_std) << '\n';
  }
}

void write_report_markdown(const EvalReport& report, std::ostream& out) {
  std::vector<std::string> tasks;
  for (const ReportRow& r : report.rows) {
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  }
  out << "Scores in %, micro-averaged within each category; subscripts are standard deviations over "
      << report.runs << " rephrasing run(s).\n";
  for (const std::string& task : tasks) {
    std::vector<std::string> categories;
    std::set<std::string> parts;
    std::map<std::pair<std::string, std::string>, const ReportRow*> cell;
    for (const ReportRow& r : report.rows) {
      if (r.task != task) continue;
      if (std::find(categories.begin(), categories.end(), r.category) == categories.end()) {
        categories.push_back(r.category);
      }
      parts.insert(r.partition);
      cell[{r.category, r.partition}] = &r;
    }
    const bool desc = task == "Desc";
    struct Column {
      std::string header;
      std::string partition;
      char metric;  // 'p', 'r', 'f'
    };
    std::vector<Column> columns;
    if (desc) {
      columns.push_back({"ROUGE-L F1", "all", 'f'});
    } else {
      columns.push_back({"P", "all", 'p'});
      columns.push_back({"R", "all", 'r'});
      columns.push_back({"F1", "all", 'f'});
    }
    if (parts.contains("entity:seen")) columns.push_back({"R (seen entities)", "entity:seen", 'r'});
    if (parts.contains("entity:unseen")) columns.push_back({"R (unseen entities)", "entity:unseen", 'r'});
    if (parts.contains("instruction:seen")) {
      columns.push_back({desc ? "ROUGE-L F1 (seen instr.)" : "F1 (seen instr.)", "instruction:seen", 'f'});
    }
    if (parts.contains("instruction:unseen")) {
      columns.push_back({desc ? "ROUGE-L F1 (unseen instr.)" : "F1 (unseen instr.)", "instruction:unseen", 'f'});
    }
    out << "\n### " << task << "\n\n| Category |";
    for (const Column& c : columns) out << ' ' << c.header << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
    out << '\n';
    for (const std::string& category : categories) {
      out << "| " << category << " |";
      for (const Column& c : columns) {
        auto it = cell.find({category, c.partition});
        if (it == cell.end()) {
          out << " -- |";
          continue;
        }
        const ReportRow& r = *it->second;
        if (desc && c.metric == 'r') {
          out << ' ' << percent_cell(r.recall, r.recall_std) << " |";
        } else if (c.metric == 'p') {
          out << ' ' << percent_cell(r.precision, r.precision_std) << " |";
        } else if (c.metric == 'r') {
          out << ' ' << percent_cell(r.recall, r.recall_std) << " |";
        } else {
          out << ' ' << percent_cell(r.f1, r.f1_std) << " |";
        }
      }
      out << '\n';
    }
  }
  if (!report.diagnostics.empty()) {
    out << "\n### Instruction following (error rates)\n\n"
        << "| Category | JSON error | Number failure | Type failure |\n|---|---|---|---|\n";
    for (const DiagnosticRow& d : report.diagnostics) {
      out << "| " << d.category << " | " << percent_cell(d.json_error_rate, d.json_error_std) << " | "
          << percent_cell(d.number_failure_rate, d.number_failure_std) << " | "
          << percent_cell(d.type_failure_rate, d.type_failure_std) << " |\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Serialization of per-sample scores

namespace {

std::string task_code(Task t) {
  switch (t) {
    case Task::kMentionDetection: return "MD";
    case Task::kEntityLinking: return "EL";
    case Task::kEntityTyping: return "ET";
    case Task::kOpenRe: return "OpenRE";
    case Task::kDescription: return "Desc";
    case Task::kAliases: return "Aliases";
  }
  return "?";
}

Task task_from_code(const std::string& s) {
  for (Task t : {Task::kMentionDetection, Task::kEntityLinking, Task::kEntityTyping, Task::kOpenRe,
                 Task::kDescription, Task::kAliases}) {
    if (task_code(t) == s) return t;
  }
  throw Error("unknown task '" + s + "'");
}

nlohmann::json acc_json(const MeanAccumulator& a) { return {a.sum, a.count}; }
MeanAccumulator acc_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<std::size_t>()};
}

}  // namespace

nlohmann::json to_json(const SampleScore& s) {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [key, c] : s.counts) {
    counts.push_back({{"task", task_code(key.task)},
                      {"threshold", key.threshold},
                      {"pred_credit", c.pred_credit},
                      {"pred_total", c.pred_total},
                      {"gold_credit", c.gold_credit},
                      {"gold_total", c.gold_total}});
  }
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& [key, pr] : s.entity_partitions) {
    parts.push_back({{"task", task_code(key.task)},
                     {"threshold", key.threshold},
                     {"seen", acc_json(pr.by_partition[0])},
                     {"unseen", acc_json(pr.by_partition[1])}});
  }
  nlohmann::json j;
  j["sample_id"] = s.sample_id;
  j["category"] = instructions::category_name(s.category);
  j["run"] = s.run;
  j["parsed"] = s.parsed;
  j["instruction_partition"] =
      s.instruction_partition ? nlohmann::json(splitter::partition_name(*s.instruction_partition)) : nlohmann::json(nullptr);
  j["counts"] = std::move(counts);
  j["description"] = acc_json(s.description);
  j["entity_partitions"] = std::move(parts);
  j["diagnostics"] = {{"json_error", s.diagnostics.json_error},
                      {"number_checked", s.diagnostics.number_checked},
                      {"number_failed", s.diagnostics.number_failed},
                      {"type_checked", s.diagnostics.type_checked},
                      {"type_failed", s.diagnostics.type_failed}};
  return j;
}

SampleScore sample_score_from_json(const nlohmann::json& j) {
  SampleScore s;
  s.sample_id = j.at("sample_id").get<std::string>();
  auto cat = instructions::parse_category(j.at("category").get<std::string>());
  if (!cat) throw Error("unknown category in score record " + s.sample_id);
  s.category = *cat;
  s.run = j.at("run").get<std::size_t>();
  s.parsed = j.at("parsed").get<bool>();
  if (const auto& ip = j.at("instruction_partition"); ip.is_string()) {
    s.instruction_partition = splitter::parse_partition(ip.get<std::string>());
  }
  for (const auto& c : j.at("counts")) {
    TaskKey key{task_from_code(c.at("task").get<std::string>()), c.at("threshold").get<double>()};
    s.counts[key] = {c.at("pred_credit").get<double>(), c.at("pred_total").get<std::size_t>(),
                     c.at("gold_credit").get<double>(), c.at("gold_total").get<std::size_t>()};
  }
  s.description = acc_from(j.at("description"));
  for (const auto& p : j.at("entity_partitions")) {
    TaskKey key{task_from_code(p.at("task").get<std::string>()), p.at("threshold").get<double>()};
    PartitionRecall pr;
    pr.by_partition[0] = acc_from(p.at("seen"));
    pr.by_partition[1] = acc_from(p.at("unseen"));
    s.entity_partitions[key] = pr;
  }
  const auto& d = j.at("diagnostics");
  s.diagnostics = {d.at("json_error").get<bool>(), d.at("number_checked").get<bool>(),
                   d.at("number_failed").get<bool>(), d.at("type_checked").get<bool>(),
                   d.at("type_failed").get<bool>()};
  return s;
}

}  // namespace forge::eval
