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

#ifndef FORGE_EVALSUITE_HPP_
#define FORGE_EVALSUITE_HPP_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/instructions.hpp"
#include "forge/linearizer.hpp"
#include "forge/splitter.hpp"
#include "json.hpp"

namespace forge::eval {

using Tokens = std::vector<std::string>;

// Lowercases ASCII and splits on runs of non-alphanumeric ASCII. Bytes of
// multi-byte UTF-8 sequences count as word characters.
Tokens tokenize(std::string_view s);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// LCS-based precision (over the candidate), recall (over the reference) and
// their harmonic mean. All zero when either side is empty.
RougeScore rouge_l(const Tokens& candidate, const Tokens& reference);
double rouge_l_f1(const Tokens& candidate, const Tokens& reference);
double rouge_l_f1(std::string_view candidate, std::string_view reference);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

double harmonic_mean(double p, double r);

// Additive match statistics. Precision is pred_credit / pred_total and
// recall gold_credit / gold_total; for exact-match tasks both credits are the
// number of matches, for OpenRE they are sums of soft scores.
struct MatchCounts {
  double pred_credit = 0.0;
  std::size_t pred_total = 0;
  double gold_credit = 0.0;
  std::size_t gold_total = 0;

  MatchCounts& operator+=(const MatchCounts& o);
  // Empty prediction and empty gold is a perfect (vacuous) score.
  Prf prf() const;
};

using linearizer::TargetObject;

// Greedy one-to-one pairing of predicted and gold entities with equal
// mention strings, i-th occurrence to i-th occurrence. Pairs are (pred, gold).
std::vector<std::pair<std::size_t, std::size_t>> match_mentions(const TargetObject& pred,
                                                                const TargetObject& gold);

MatchCounts score_mention_detection(const TargetObject& pred, const TargetObject& gold);
MatchCounts score_entity_linking(const TargetObject& pred, const TargetObject& gold,
                                 double threshold);
MatchCounts score_entity_typing(const TargetObject& pred, const TargetObject& gold);
MatchCounts score_aliases(const TargetObject& pred, const TargetObject& gold);

struct FlatTriplet {
  std::string head;
  std::string relation;
  std::string tail;
};
std::vector<FlatTriplet> flatten(const std::vector<linearizer::TargetTriplet>& triplets);

// Mean of the per-slot ROUGE-L F1 over head, relation and tail.
double triplet_match_score(const FlatTriplet& pred, const FlatTriplet& gold);

// Greedy one-to-one assignment on a score matrix (rows = pred, cols = gold):
// pairs by descending score, ties by (row, col). Returns the chosen pairs.
std::vector<std::pair<std::size_t, std::size_t>> greedy_assignment(
    const std::vector<std::vector<double>>& scores);

// CaRB-style scoring with the ROUGE-L matcher. Pair scores below
// `match_threshold` count as zero.
MatchCounts score_open_re(const std::vector<FlatTriplet>& pred,
                          const std::vector<FlatTriplet>& gold, double match_threshold = 0.0);
MatchCounts score_open_re(const TargetObject& pred, const TargetObject& gold,
                          double match_threshold = 0.0);

struct MeanAccumulator {
  double sum = 0.0;
  std::size_t count = 0;

  MeanAccumulator& operator+=(const MeanAccumulator& o);
  std::optional<double> mean() const;
};

// Mean ROUGE-L F1 of descriptions over gold mentions that have one;
// unmatched gold mentions contribute zero. Absent when no gold descriptions.
MeanAccumulator score_description(const TargetObject& pred, const TargetObject& gold);

enum class Task {
  kMentionDetection,
  kEntityLinking,
  kEntityTyping,
  kOpenRe,
  kDescription,
  kAliases,
};

struct TaskKey {
  Task task = Task::kMentionDetection;
  double threshold = 0.0;  // entity linking only

  auto operator<=>(const TaskKey&) const = default;
};
std::string task_name(const TaskKey& key);  // "MD", "EL(T=0.8)", ...

// Gold-side recall counts split by the gold mention's entity partition.
struct PartitionRecall {
  std::array<MeanAccumulator, 2> by_partition;  // indexed by Partition

  PartitionRecall& operator+=(const PartitionRecall& o);
  std::optional<double> recall(splitter::Partition p) const;
  std::size_t denominator(splitter::Partition p) const;
};

// Recall of `task` restricted to gold items whose mention carries each label.
// Triplets are attributed to unseen when either endpoint is unseen.
PartitionRecall partitioned_recall(const TargetObject& pred, const TargetObject& gold,
                                   const std::vector<splitter::Partition>& labels,
                                   const TaskKey& task, double match_threshold = 0.0);

struct EvalConfig {
  std::vector<double> title_thresholds = {1.0, 0.8};
  std::string tokenizer = "lower-alnum";
  double carb_match_threshold = 0.0;
  std::size_t rephrasing_runs = 3;
  linearizer::Mode parse_mode = linearizer::Mode::kStrict;

  std::string validate() const;
  std::vector<TaskKey> tasks() const;
};

struct GoldSample {
  std::string sample_id;
  std::size_t run = 0;
  instructions::InstructionSpec spec;
  TargetObject target;
  std::vector<std::string> mention_qids;
};

// Reads one augmented sample line; its "output" must parse strictly.
GoldSample gold_from_json(const nlohmann::json& j);

struct Diagnostics {
  bool json_error = false;
  bool number_checked = false;
  bool number_failed = false;
  bool type_checked = false;
  bool type_failed = false;
};

// Instruction-following checks on one raw prediction.
// `also_allowed` widens the instructed type set; abstract-type samples pass
// the base-type labels of their gold entities, since outputs name base types.
Diagnostics diagnose(std::string_view raw_text, const instructions::InstructionSpec& spec,
                     const std::vector<std::string>& also_allowed = {});

struct SampleScore {
  std::string sample_id;
  instructions::Category category = instructions::Category::kDefault;
  std::size_t run = 0;
  bool parsed = false;
  std::optional<splitter::Partition> instruction_partition;
  std::map<TaskKey, MatchCounts> counts;
  MeanAccumulator description;
  std::map<TaskKey, PartitionRecall> entity_partitions;
  Diagnostics diagnostics;
};

// Scores one prediction. Unparseable output scores zero on every task.
SampleScore score_sample(std::string_view raw_text, const GoldSample& gold,
                         const std::optional<splitter::PartitionLabels>& labels,
                         const EvalConfig& config);

struct ReportRow {
  std::string task;
  std::string category;   // display name, or "Macro Avg."
  std::string partition;  // all | entity:seen | entity:unseen | instruction:seen | ...
  std::optional<double> precision, recall, f1;
  std::optional<double> precision_std, recall_std, f1_std;
  std::size_t samples = 0;  // per run
};

struct DiagnosticRow {
  std::string category;
  std::optional<double> json_error_rate, number_failure_rate, type_failure_rate;
  std::optional<double> json_error_std, number_failure_std, type_failure_std;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<DiagnosticRow> diagnostics;
  std::size_t runs = 0;
};

inline constexpr std::string_view kMacroAverage = "Macro Avg.";

// Micro-averaged metrics per (task, category, partition) within each run,
// then mean and population standard deviation across runs. Macro rows are
// means over the category rows.
EvalReport aggregate_report(const std::vector<SampleScore>& scores, const EvalConfig& config);

// Invariant violations (rates outside [0,1], macro != mean of rows).
std::vector<std::string> self_check(const EvalReport& report);

void write_report_tsv(const EvalReport& report, std::ostream& out);
void write_diagnostics_tsv(const EvalReport& report, std::ostream& out);
// One table per task: category rows, partition columns, std as <sub>.
void write_report_markdown(const EvalReport& report, std::ostream& out);

nlohmann::json to_json(const SampleScore& score);
SampleScore sample_score_from_json(const nlohmann::json& j);

}  // namespace forge::eval

#endif  // FORGE_EVALSUITE_HPP_
