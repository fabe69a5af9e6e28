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

// forge: build instruction-following open-world IE corpora from Wikipedia
// and Wikidata dumps, and score model predictions against them.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forge/date.hpp"
#include "forge/error.hpp"
#include "forge/log.hpp"
#include "forge/pipeline.hpp"

namespace {

using forge::pipeline::PipelineConfig;
using forge::pipeline::Stage;

struct Stages {
  std::string name;
  std::string help;
};

const std::vector<Stages> kStageHelp = {
    {"ingest-wikidata", "stream a Wikidata JSON dump into an ontology snapshot"},
    {"ingest-wikipedia", "extract resolved leading paragraphs from a MediaWiki XML dump"},
    {"align", "weakly annotate mentions and distantly supervise triplets"},
    {"stats", "dataset statistics TSV for an annotated corpus"},
    {"augment", "instruction-augmented samples (train or eval mode)"},
    {"split", "open-world evaluation corpus, or seen/unseen partition labels"},
    {"score", "score predictions against gold samples"},
    {"report", "aggregate scores into TSV and Markdown tables"},
    {"selfcheck", "run built-in metric invariants (and perfect-prediction identity with --gold)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: open-world information extraction corpus builder and scorer", "forge"};
  app.set_version_flag("--version", std::string(forge::pipeline::kToolVersion));
  app.set_config("--config", "", "key = value configuration file (TOML or INI); flags override it");
  app.require_subcommand(1, 1);
  app.fallthrough();

  PipelineConfig config;
  std::string snapshot_date, mode = "train", parse_mode = "strict", log_level = "warning";
  std::uint64_t seed = 0;
  bool no_cross = false;

  app.add_option("--wikidata-dump", config.wikidata_dump, "Wikidata JSON dump (.json or .json.gz)");
  app.add_option("--wikipedia-dump", config.wikipedia_dump, "MediaWiki XML dump (.xml or .xml.gz) or article JSONL");
  app.add_option("--allowlist", config.allowlist, "file of qids to keep, one per line");
  app.add_option("--ontology", config.ontology, "ontology snapshot");
  app.add_option("--paragraphs", config.paragraphs, "paragraph JSONL");
  app.add_option("--annotated", config.annotated, "annotated document JSONL");
  app.add_option("--templates", config.templates, "instruction template file (TSV or JSONL)");
  app.add_option("--samples", config.samples, "sample JSONL (augment output)");
  app.add_option("--train-samples", config.train_samples, "training sample JSONL (instruction inventory)");
  app.add_option("--train-ids", config.train_ids, "training page ids: one per line, or paragraph JSONL");
  app.add_option("--eval-dump", config.eval_dump, "later Wikipedia dump for the open-world corpus");
  app.add_option("--train-ontology", config.train_ontology, "ontology snapshot of the training period");
  app.add_option("--gold", config.gold, "gold sample JSONL");
  app.add_option("--pred", config.pred, "prediction JSONL: {sample_id, output_text}");
  app.add_option("--partitions", config.partitions, "partition sidecar JSONL");
  app.add_option("--scores", config.scores, "per-sample score JSONL");
  app.add_option("-o,--out", config.out, "primary output path");
  app.add_option("--cache-dir", config.cache_dir, "artifact directory for defaults")->envname("FORGE_CACHE_DIR");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (required by augment)");
  app.add_option("--language", config.language, "language code for labels and sitelinks")->capture_default_str();
  app.add_option("--snapshot-date", snapshot_date, "dump date, YYYY-MM-DD or MM/DD/YYYY");
  app.add_option("--mode", mode, "augment mode")->check(CLI::IsMember({"train", "eval"}))->capture_default_str();
  app.add_flag("--no-cross", no_cross, "eval mode: skip Number+type cross samples");
  app.add_option("--split-name", config.split_name, "row label for stats")->capture_default_str();
  app.add_option("-j,--jobs", config.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--min-arity", config.augment.min_arity, "fewest types/descriptions per instruction")
      ->capture_default_str();
  app.add_option("--max-arity", config.augment.max_arity, "most types/descriptions per instruction")
      ->capture_default_str();
  app.add_option("--title-threshold", config.eval.title_thresholds, "entity-linking ROUGE-L thresholds")
      ->expected(1, -1);
  app.add_option("--carb-threshold", config.eval.carb_match_threshold, "minimum triplet match score")
      ->capture_default_str();
  app.add_option("--runs", config.eval.rephrasing_runs, "rephrasing runs per evaluation sample")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--parse-mode", parse_mode, "prediction schema validation")
      ->check(CLI::IsMember({"strict", "lenient"}))
      ->capture_default_str();
  app.add_option("--log-level", log_level, "debug, info, warning or error")
      ->check(CLI::IsMember({"debug", "info", "warning", "error"}))
      ->capture_default_str();

  std::vector<std::pair<CLI::App*, Stage>> subcommands;
  for (const auto& s : kStageHelp) {
    subcommands.emplace_back(app.add_subcommand(s.name, s.help), *forge::pipeline::parse_stage(s.name));
  }

  CLI11_PARSE(app, argc, argv);

  Stage stage = Stage::kSelfCheck;
  for (const auto& [cmd, st] : subcommands) {
    if (cmd->parsed()) stage = st;
  }
  const std::string name(forge::pipeline::stage_name(stage));

  if (seed_opt->count() > 0) config.seed = seed;
  config.eval_mode = mode == "eval";
  config.cross = !no_cross;
  config.eval.parse_mode = parse_mode == "strict" ? forge::linearizer::Mode::kStrict : forge::linearizer::Mode::kLenient;
  if (!snapshot_date.empty()) {
    config.snapshot_date = forge::parse_date(snapshot_date);
    if (!config.snapshot_date) {
      std::cerr << "forge " << name << ": error: bad --snapshot-date '" << snapshot_date << "'\n";
      return 2;
    }
  }
  const forge::log::Level level = log_level == "debug"  ? forge::log::Level::kDebug
                                  : log_level == "info" ? forge::log::Level::kInfo
                                  : log_level == "error" ? forge::log::Level::kError
                                                         : forge::log::Level::kWarning;
  forge::log::set_min_level(level);

  try {
    const auto result = forge::pipeline::run_stage(stage, config);
    std::cout << name << ": " << result.summary << '\n';
    for (const auto& p : result.outputs) std::cout << "  wrote " << p.string() << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "forge " << name << ": error: " << e.what() << '\n';
    return 2;
  }
}
