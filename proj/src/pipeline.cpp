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

#include "forge/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "forge/align.hpp"
#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/linearizer.hpp"
#include "forge/log.hpp"
#include "forge/random.hpp"
#include "forge/splitter.hpp"
#include "forge/text.hpp"
#include "forge/wikidata.hpp"
#include "forge/wikipedia.hpp"

namespace forge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kBatch = 2048;

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string percent(std::size_t part, std::size_t whole) {
  if (whole == 0) return "0.0%";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(1);
  s << 100.0 * static_cast<double>(part) / static_cast<double>(whole) << '%';
  return s.str();
}

// The artifact `path` must exist; otherwise point at the stage producing it.
void require(const fs::path& path, Stage producer, std::string_view what) {
  if (fs::exists(path)) return;
  throw StageError("missing " + std::string(what) + " '" + path.string() + "'; run `forge " +
                   std::string(stage_name(producer)) + "` first");
}

void require_input(const fs::path& path, std::string_view what) {
  if (fs::exists(path)) return;
  throw StageError(std::string(what) + " '" + path.string() + "' does not exist");
}

fs::path or_default(const fs::path& given, Stage producer, const PipelineConfig& config) {
  return given.empty() ? default_artifact(producer, config) : given;
}

fs::path sibling(const fs::path& p, std::string_view new_ext) {
  fs::path s = p;
  s.replace_extension(new_ext);
  return s;
}

void write_manifest(Stage stage, const PipelineConfig& config, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs) {
  const json m = manifest(stage, config, inputs, outputs);
  io::write_file_atomic(fs::path(outputs.front().string() + ".manifest.json"), m.dump(2) + "\n");
}

// --- article corpus (split output, ingest-wikipedia input) -----------------

json article_to_json(const wikipedia::ArticleRecord& a) {
  return {{"page_id", a.page_id},
          {"title", a.title},
          {"revision_timestamp", format_timestamp(a.revision_timestamp)},
          {"wikitext", a.wikitext}};
}

wikipedia::ArticleRecord article_from_json(const json& j) {
  wikipedia::ArticleRecord a;
  a.page_id = j.at("page_id").get<std::int64_t>();
  a.title = j.at("title").get<std::string>();
  auto ts = parse_timestamp(j.at("revision_timestamp").get<std::string>());
  if (!ts) throw Error("article " + std::to_string(a.page_id) + ": bad revision_timestamp");
  a.revision_timestamp = *ts;
  a.wikitext = j.at("wikitext").get<std::string>();
  return a;
}

bool looks_like_jsonl(const fs::path& path) {
  auto in = io::open_input(path);
  char c = 0;
  while (in->get(c)) {
    if (!std::isspace(static_cast<unsigned char>(c))) return c == '{';
  }
  return false;
}

// Feeds articles from either an XML dump or an article JSONL corpus.
void for_each_article(const fs::path& path, const std::function<void(wikipedia::ArticleRecord)>& fn) {
  if (looks_like_jsonl(path)) {
    auto in = io::open_input(path);
    io::for_each_jsonl(*in, [&](const json& j) { fn(article_from_json(j)); });
    return;
  }
  auto in = io::open_input(path);
  wikipedia::DumpReader reader(*in);
  std::size_t reported = 0;
  auto flush_issues = [&] {
    for (; reported < reader.issues().size(); ++reported) {
      const auto& issue = reader.issues()[reported];
      log::warning("page " + std::to_string(issue.page_id) + " (" + issue.title + ") skipped: " + issue.reason);
    }
  };
  while (auto article = reader.next()) {
    flush_issues();
    fn(std::move(*article));
  }
  flush_issues();
}

// Streams JSONL records in batches so large files never sit in memory.
template <typename Fn>
void for_each_batch(const fs::path& path, Fn fn) {
  auto in = io::open_input(path);
  std::vector<json> batch;
  io::for_each_jsonl(*in, [&](const json& j) {
    batch.push_back(j);
    if (batch.size() == kBatch) {
      fn(batch);
      batch.clear();
    }
  });
  if (!batch.empty()) fn(batch);
}

std::vector<std::string> read_id_list(const fs::path& path) {
  auto in = io::open_input(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(*in, line)) {
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  return out;
}

// --- stages ----------------------------------------------------------------

StageResult ingest_wikidata(const PipelineConfig& c) {
  require_input(c.wikidata_dump, "wikidata dump");
  wikidata::IngestOptions options;
  options.language = c.language;
  options.snapshot_date = c.snapshot_date;
  std::vector<fs::path> inputs{c.wikidata_dump};
  if (!c.allowlist.empty()) {
    require_input(c.allowlist, "allowlist");
    auto ids = read_id_list(c.allowlist);
    options.allowlist.emplace(ids.begin(), ids.end());
    inputs.push_back(c.allowlist);
  }
  wikidata::IngestReport report;
  auto in = io::open_input(c.wikidata_dump);
  const wikidata::Ontology ontology = wikidata::parse_wikidata_dump(*in, options, &report);

  io::AtomicWriter snap(c.out);
  wikidata::write_snapshot(ontology, snap.stream());
  snap.commit();
  const fs::path skip_log = c.out.string() + ".skipped.tsv";
  io::AtomicWriter skipped(skip_log);
  skipped.stream() << "line_number\treason\n";
  for (const auto& s : report.skipped) {
    skipped.stream() << s.line_number << '\t' << s.reason << '\n';
    log::warning("wikidata line " + std::to_string(s.line_number) + " skipped: " + s.reason);
  }
  skipped.commit();
  write_manifest(Stage::kIngestWikidata, c, inputs, {c.out, skip_log});
  return {0,
          {c.out, skip_log},
          std::to_string(report.entities_kept) + " entities, " + std::to_string(report.properties_kept) +
              " properties, " + std::to_string(report.skipped.size()) + " lines skipped"};
}

StageResult ingest_wikipedia(const PipelineConfig& c) {
  require_input(c.wikipedia_dump, "wikipedia dump");
  const fs::path onto_path = or_default(c.ontology, Stage::kIngestWikidata, c);
  require(onto_path, Stage::kIngestWikidata, "ontology snapshot");
  const wikidata::Ontology ontology = wikidata::load_snapshot(onto_path);

  io::AtomicWriter out(c.out);
  wikipedia::write_paragraphs_header(out.stream());
  std::size_t articles = 0, written = 0, empty = 0, anchors = 0, unresolved = 0, unbalanced = 0;
  std::vector<wikipedia::ArticleRecord> batch;
  auto flush = [&] {
    auto paragraphs = parallel_map(batch, c.jobs, [&](const wikipedia::ArticleRecord& a) {
      wikipedia::Paragraph p = wikipedia::extract_leading_paragraph(a.wikitext);
      p.doc_id = std::to_string(a.page_id);
      p.source_title = a.title;
      return wikipedia::resolve_anchor_targets(std::move(p), ontology.title_index());
    });
    for (const auto& p : paragraphs) {
      if (p.text.empty()) {
        ++empty;
        continue;
      }
      anchors += p.anchors.size() + p.unresolved_anchors;
      unresolved += p.unresolved_anchors;
      unbalanced += p.quality == wikipedia::Quality::kUnbalancedMarkup;
      out.stream() << dump_line(wikipedia::to_json(p)) << '\n';
      ++written;
    }
    batch.clear();
  };
  for_each_article(c.wikipedia_dump, [&](wikipedia::ArticleRecord a) {
    ++articles;
    batch.push_back(std::move(a));
    if (batch.size() == kBatch) flush();
  });
  flush();
  out.commit();
  write_manifest(Stage::kIngestWikipedia, c, {c.wikipedia_dump, onto_path}, {c.out});
  if (unresolved > 0) {
    log::info(std::to_string(unresolved) + " of " + std::to_string(anchors) +
              " anchors did not resolve to an ontology entity");
  }
  return {0,
          {c.out},
          std::to_string(written) + " paragraphs from " + std::to_string(articles) + " articles (" +
              std::to_string(empty) + " empty, " + std::to_string(unbalanced) + " with unbalanced markup); " +
              std::to_string(unresolved) + "/" + std::to_string(anchors) + " anchors unresolved (" +
              percent(unresolved, anchors) + ")"};
}

json annotated_header() {
  json h = io::jsonl_header("forge-annotated");
  h["offset_unit"] = wikipedia::kOffsetUnit;
  return h;
}

StageResult align_stage(const PipelineConfig& c) {
  const fs::path onto_path = or_default(c.ontology, Stage::kIngestWikidata, c);
  const fs::path para_path = or_default(c.paragraphs, Stage::kIngestWikipedia, c);
  require(onto_path, Stage::kIngestWikidata, "ontology snapshot");
  require(para_path, Stage::kIngestWikipedia, "paragraphs");
  const wikidata::Ontology ontology = wikidata::load_snapshot(onto_path);

  io::AtomicWriter out(c.out);
  out.stream() << dump_line(annotated_header()) << '\n';
  std::size_t docs = 0, mentions = 0, triplets = 0, untitled = 0, unknown = 0;
  for_each_batch(para_path, [&](const std::vector<json>& batch) {
    auto results = parallel_map(batch, c.jobs, [&](const json& j) {
      align::AlignCounters counters;
      auto doc = align::weak_supervise(wikipedia::paragraph_from_json(j), ontology, &counters);
      return std::make_pair(align::distant_supervise_relations(std::move(doc), ontology), counters);
    });
    for (const auto& [doc, counters] : results) {
      ++docs;
      mentions += doc.mentions.size();
      triplets += doc.triplets.size();
      untitled += counters.untitled_dropped;
      unknown += counters.unknown_entity_dropped;
      out.stream() << dump_line(align::to_json(doc)) << '\n';
    }
  });
  out.commit();
  write_manifest(Stage::kAlign, c, {onto_path, para_path}, {c.out});
  return {0,
          {c.out},
          std::to_string(docs) + " documents, " + std::to_string(mentions) + " mentions, " +
              std::to_string(triplets) + " triplets; dropped " + std::to_string(untitled) + " untitled and " +
              std::to_string(unknown) + " unknown-entity anchors"};
}

StageResult stats_stage(const PipelineConfig& c) {
  const fs::path ann_path = or_default(c.annotated, Stage::kAlign, c);
  require(ann_path, Stage::kAlign, "annotated corpus");
  align::StatsAccumulator acc;
  for_each_batch(ann_path, [&](const std::vector<json>& batch) {
    for (const json& j : batch) acc.add(align::document_from_json(j));
  });
  const align::DatasetStats stats = acc.finish();
  io::AtomicWriter out(c.out);
  align::write_stats_tsv(out.stream(), {{c.split_name, stats}});
  out.commit();
  write_manifest(Stage::kStats, c, {ann_path}, {c.out});
  return {0, {c.out},
          std::to_string(stats.articles) + " articles, " + std::to_string(stats.mentions) + " mentions, " +
              std::to_string(stats.triplets) + " triplets"};
}

StageResult augment_stage(const PipelineConfig& c) {
  const fs::path ann_path = or_default(c.annotated, Stage::kAlign, c);
  const fs::path onto_path = or_default(c.ontology, Stage::kIngestWikidata, c);
  require(ann_path, Stage::kAlign, "annotated corpus");
  require(onto_path, Stage::kIngestWikidata, "ontology snapshot");
  require_input(c.templates, "template file");
  const wikidata::Ontology ontology = wikidata::load_snapshot(onto_path);
  const instructions::TemplatePool pool = instructions::load_templates(c.templates);
  const std::uint64_t seed = *c.seed;

  io::AtomicWriter out(c.out);
  json header = io::jsonl_header("forge-samples");
  header["mode"] = c.eval_mode ? "eval" : "train";
  header["seed"] = seed;
  header["rephrasing_runs"] = c.eval_mode ? c.eval.rephrasing_runs : 1;
  out.stream() << dump_line(header) << '\n';

  std::map<instructions::Category, std::size_t> per_category;
  std::size_t docs = 0, samples = 0;
  for_each_batch(ann_path, [&](const std::vector<json>& batch) {
    auto results = parallel_map(batch, c.jobs, [&](const json& j) {
      const align::AnnotatedDocument doc = align::document_from_json(j);
      // Each document draws from its own stream, so worker count never
      // changes the output.
      Rng rng = derive_rng(seed, doc.doc_id);
      auto base = instructions::augment_document(doc, pool, ontology, rng, c.augment);
      if (!c.eval_mode) return base;
      if (c.cross) {
        Rng cross_rng = derive_rng(seed, doc.doc_id + "#cross");
        auto cross = instructions::make_cross_instruction_samples(doc, pool, ontology, cross_rng, c.augment);
        for (auto& s : cross) base.push_back(std::move(s));
      }
      std::vector<instructions::InstructedSample> runs;
      for (const auto& s : base) {
        Rng run_rng = derive_rng(seed, s.sample_id + "#runs");
        for (auto& r : instructions::rephrase_runs(s, pool, c.eval.rephrasing_runs, run_rng)) {
          runs.push_back(std::move(r));
        }
      }
      return runs;
    });
    for (const auto& doc_samples : results) {
      ++docs;
      for (const auto& s : doc_samples) {
        ++samples;
        ++per_category[s.spec.category];
        out.stream() << dump_line(instructions::to_json(s)) << '\n';
      }
    }
  });
  out.commit();
  write_manifest(Stage::kAugment, c, {ann_path, onto_path, c.templates}, {c.out});
  std::string breakdown;
  for (const auto& [cat, n] : per_category) {
    breakdown += (breakdown.empty() ? "" : ", ") + std::string(instructions::category_name(cat)) + "=" +
                 std::to_string(n);
  }
  return {0, {c.out},
          std::to_string(samples) + " samples from " + std::to_string(docs) + " documents (" + breakdown + ")"};
}

std::unordered_set<std::int64_t> read_train_ids(const fs::path& path) {
  std::unordered_set<std::int64_t> ids;
  auto parse = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      ids.insert(v);
    } catch (const std::exception&) {
      throw StageError("'" + path.string() + "': '" + s + "' is not a page id");
    }
  };
  if (looks_like_jsonl(path)) {
    auto in = io::open_input(path);
    io::for_each_jsonl(*in, [&](const json& j) {
      if (j.contains("page_id")) {
        ids.insert(j.at("page_id").get<std::int64_t>());
      } else {
        parse(j.at("doc_id").get<std::string>());
      }
    });
  } else {
    for (const std::string& s : read_id_list(path)) parse(s);
  }
  return ids;
}

StageResult split_stage(const PipelineConfig& c) {
  const bool corpus_mode = !c.train_ids.empty() || !c.eval_dump.empty();
  if (corpus_mode) {
    require_input(c.train_ids, "training page-id list");
    require_input(c.eval_dump, "evaluation dump");
    const auto ids = read_train_ids(c.train_ids);
    std::vector<wikipedia::ArticleRecord> eval_articles;
    for_each_article(c.eval_dump, [&](wikipedia::ArticleRecord a) { eval_articles.push_back(std::move(a)); });
    const std::size_t total = eval_articles.size();
    const auto corpus = splitter::build_open_world_corpus(ids, std::move(eval_articles));
    io::AtomicWriter out(c.out);
    out.stream() << dump_line(io::jsonl_header("forge-articles")) << '\n';
    for (const auto& a : corpus) out.stream() << dump_line(article_to_json(a)) << '\n';
    out.commit();
    write_manifest(Stage::kSplit, c, {c.train_ids, c.eval_dump}, {c.out});
    return {0, {c.out},
            std::to_string(corpus.size()) + " of " + std::to_string(total) +
                " evaluation articles are absent from training"};
  }

  const fs::path samples_path = or_default(c.samples, Stage::kAugment, c);
  require(samples_path, Stage::kAugment, "evaluation samples");
  require(c.train_samples, Stage::kAugment, "training samples");
  require(c.train_ontology, Stage::kIngestWikidata, "training ontology snapshot");
  const wikidata::Ontology train_ontology = wikidata::load_snapshot(c.train_ontology);
  splitter::InstructionInventory inventory;
  for_each_batch(c.train_samples, [&](const std::vector<json>& batch) {
    for (const json& j : batch) inventory.add(instructions::spec_from_json(j.at("spec")));
  });
  io::AtomicWriter out(c.out);
  out.stream() << dump_line(io::jsonl_header("forge-partitions")) << '\n';
  std::size_t samples = 0, unseen_instr = 0, mentions = 0, unseen_mentions = 0;
  for_each_batch(samples_path, [&](const std::vector<json>& batch) {
    auto labels = parallel_map(batch, c.jobs, [&](const json& j) {
      return splitter::label_sample(j.at("sample_id").get<std::string>(),
                                    instructions::spec_from_json(j.at("spec")),
                                    j.at("mention_qids").get<std::vector<std::string>>(), train_ontology,
                                    inventory);
    });
    for (const auto& l : labels) {
      ++samples;
      unseen_instr += l.instruction == splitter::Partition::kUnseen;
      mentions += l.entities.size();
      unseen_mentions += static_cast<std::size_t>(
          std::count(l.entities.begin(), l.entities.end(), splitter::Partition::kUnseen));
      out.stream() << dump_line(splitter::to_json(l)) << '\n';
    }
  });
  out.commit();
  write_manifest(Stage::kSplit, c, {samples_path, c.train_samples, c.train_ontology}, {c.out});
  return {0, {c.out},
          std::to_string(samples) + " samples labelled; unseen instructions " + percent(unseen_instr, samples) +
              ", unseen mentions " + std::to_string(unseen_mentions) + "/" + std::to_string(mentions)};
}

StageResult score_stage(const PipelineConfig& c) {
  // Scoring runs against evaluation-mode samples unless told otherwise.
  PipelineConfig eval_defaults = c;
  eval_defaults.eval_mode = true;
  const fs::path gold_path = !c.gold.empty() ? c.gold : or_default(c.samples, Stage::kAugment, eval_defaults);
  require(gold_path, Stage::kAugment, "gold samples");
  require_input(c.pred, "prediction file");

  std::vector<eval::GoldSample> gold;
  std::unordered_map<std::string, std::size_t> index;
  {
    auto in = io::open_input(gold_path);
    io::for_each_jsonl(*in, [&](const json& j) {
      eval::GoldSample g = eval::gold_from_json(j);
      if (!index.emplace(g.sample_id, gold.size()).second) {
        throw StageError("duplicate gold sample '" + g.sample_id + "'");
      }
      gold.push_back(std::move(g));
    });
  }
  std::vector<std::optional<std::string>> outputs(gold.size());
  {
    auto in = io::open_input(c.pred);
    io::for_each_jsonl(*in, [&](const json& j) {
      const auto id = j.at("sample_id").get<std::string>();
      auto it = index.find(id);
      if (it == index.end()) throw StageError("prediction for unknown sample '" + id + "'");
      if (outputs[it->second]) throw StageError("duplicate prediction for '" + id + "'");
      outputs[it->second] = j.at("output_text").get<std::string>();
    });
  }
  std::vector<std::optional<splitter::PartitionLabels>> labels(gold.size());
  std::vector<fs::path> inputs{gold_path, c.pred};
  if (!c.partitions.empty()) {
    require(c.partitions, Stage::kSplit, "partition sidecar");
    inputs.push_back(c.partitions);
    auto in = io::open_input(c.partitions);
    io::for_each_jsonl(*in, [&](const json& j) {
      auto l = splitter::labels_from_json(j);
      auto it = index.find(l.sample_id);
      if (it != index.end()) labels[it->second] = std::move(l);
    });
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!labels[i]) throw StageError("no partition labels for sample '" + gold[i].sample_id + "'");
    }
  }
  std::size_t missing = 0;
  for (const auto& o : outputs) missing += !o.has_value();
  if (missing > 0) {
    log::warning(std::to_string(missing) + " gold samples have no prediction; scored as empty output");
  }

  std::vector<std::size_t> order(gold.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto scores = parallel_map(order, c.jobs, [&](std::size_t i) {
    return eval::score_sample(outputs[i].value_or(""), gold[i], labels[i], c.eval);
  });

  io::AtomicWriter out(c.out);
  json header = io::jsonl_header("forge-scores");
  header["title_thresholds"] = c.eval.title_thresholds;
  header["carb_match_threshold"] = c.eval.carb_match_threshold;
  header["parse_mode"] = c.eval.parse_mode == linearizer::Mode::kStrict ? "strict" : "lenient";
  out.stream() << dump_line(header) << '\n';
  std::size_t unparsed = 0;
  for (const auto& s : scores) {
    unparsed += !s.parsed;
    out.stream() << dump_line(eval::to_json(s)) << '\n';
  }
  out.commit();
  write_manifest(Stage::kScore, c, inputs, {c.out});
  return {0, {c.out},
          std::to_string(scores.size()) + " samples scored, " + std::to_string(unparsed) +
              " unparseable, " + std::to_string(missing) + " without prediction"};
}

StageResult report_stage(const PipelineConfig& c) {
  const fs::path scores_path = or_default(c.scores, Stage::kScore, c);
  require(scores_path, Stage::kScore, "scores");
  eval::EvalConfig config = c.eval;
  std::vector<eval::SampleScore> scores;
  auto in = io::open_input(scores_path);
  io::for_each_jsonl(
      *in, [&](const json& j) { scores.push_back(eval::sample_score_from_json(j)); },
      [&](const json& h) {
        if (h.contains("title_thresholds")) config.title_thresholds = h["title_thresholds"].get<std::vector<double>>();
      });
  const eval::EvalReport report = eval::aggregate_report(scores, config);
  const fs::path md = sibling(c.out, ".md");
  const fs::path diag = fs::path(sibling(c.out, "").string() + ".diagnostics.tsv");
  {
    io::AtomicWriter w(c.out);
    eval::write_report_tsv(report, w.stream());
    w.commit();
  }
  {
    io::AtomicWriter w(diag);
    eval::write_diagnostics_tsv(report, w.stream());
    w.commit();
  }
  {
    io::AtomicWriter w(md);
    eval::write_report_markdown(report, w.stream());
    w.commit();
  }
  write_manifest(Stage::kReport, c, {scores_path}, {c.out, diag, md});
  const auto problems = eval::self_check(report);
  for (const auto& p : problems) log::error("report self-check: " + p);
  return {problems.empty() ? 0 : 3, {c.out, diag, md},
          std::to_string(report.rows.size()) + " rows over " + std::to_string(report.runs) + " run(s); self-check " +
              (problems.empty() ? "passed" : "FAILED (" + std::to_string(problems.size()) + " problems)")};
}

StageResult selfcheck_stage(const PipelineConfig& c) {
  std::vector<std::pair<std::string, bool>> checks;
  auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };
  checks.emplace_back("rouge-l 'ATP Tour' vs '2023 ATP Tour' = 0.8",
                      eval::rouge_l_f1("ATP Tour", "2023 ATP Tour") == 0.8);
  checks.emplace_back("open-re Camp Nou pair = 0.822",
                      near(eval::triplet_match_score({"Camp Nou", "home venue", "Barcelona"},
                                                     {"Camp Nou", "home venue of", "FC Barcelona"}),
                           0.822, 1e-3));
  checks.emplace_back("empty target serializes canonically",
                      linearizer::serialize(linearizer::TargetObject{}) == R"({"entities": [], "triplets": []})");
  {
    eval::MatchCounts a{2, 3, 2, 3};
    const auto prf = a.prf();
    checks.emplace_back("set match {A,B,C}/{A,B,D} = 2/3", near(prf.f1, 2.0 / 3.0, 1e-12));
  }
  const fs::path gold_path = c.gold;
  if (!gold_path.empty()) {
    require(gold_path, Stage::kAugment, "gold samples");
    bool all_perfect = true;
    std::size_t n = 0;
    auto in = io::open_input(gold_path);
    io::for_each_jsonl(*in, [&](const json& j) {
      const eval::GoldSample g = eval::gold_from_json(j);
      const auto s = eval::score_sample(linearizer::serialize(g.target), g, std::nullopt, c.eval);
      ++n;
      for (const auto& [key, counts] : s.counts) all_perfect = all_perfect && counts.prf().f1 == 1.0;
      all_perfect = all_perfect && (!s.description.mean() || *s.description.mean() == 1.0);
      all_perfect = all_perfect && !s.diagnostics.json_error;
    });
    checks.emplace_back("perfect predictions score 1.0 on " + std::to_string(n) + " gold samples", all_perfect);
  }
  std::size_t failed = 0;
  std::ostringstream lines;
  for (const auto& [name, ok] : checks) {
    failed += !ok;
    lines << (ok ? "PASS " : "FAIL ") << name << '\n';
  }
  std::vector<fs::path> outputs;
  if (!c.out.empty()) {
    io::write_file_atomic(c.out, lines.str());
    outputs.push_back(c.out);
  }
  std::string summary = lines.str();
  summary += std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) + " checks passed";
  return {failed == 0 ? 0 : 1, outputs, summary};
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kIngestWikidata: return "ingest-wikidata";
    case Stage::kIngestWikipedia: return "ingest-wikipedia";
    case Stage::kAlign: return "align";
    case Stage::kStats: return "stats";
    case Stage::kAugment: return "augment";
    case Stage::kSplit: return "split";
    case Stage::kScore: return "score";
    case Stage::kReport: return "report";
    case Stage::kSelfCheck: return "selfcheck";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : {Stage::kIngestWikidata, Stage::kIngestWikipedia, Stage::kAlign, Stage::kStats, Stage::kAugment,
                  Stage::kSplit, Stage::kScore, Stage::kReport, Stage::kSelfCheck}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

fs::path default_artifact(Stage producer, const PipelineConfig& config) {
  const fs::path& dir = config.cache_dir;
  switch (producer) {
    case Stage::kIngestWikidata: return dir / "ontology.snap.jsonl";
    case Stage::kIngestWikipedia: return dir / "paragraphs.jsonl";
    case Stage::kAlign: return dir / "annotated.jsonl";
    case Stage::kStats: return dir / "stats.tsv";
    case Stage::kAugment: return dir / (config.eval_mode ? "eval_samples.jsonl" : "samples.jsonl");
    case Stage::kSplit:
      return dir / (!config.train_ids.empty() || !config.eval_dump.empty() ? "corpus.jsonl" : "partitions.jsonl");
    case Stage::kScore: return dir / "scores.jsonl";
    case Stage::kReport: return dir / "report.tsv";
    case Stage::kSelfCheck: return {};
  }
  return {};
}

json PipelineConfig::describe() const {
  json j;
  auto put_path = [&](const char* key, const fs::path& p) {
    if (!p.empty()) j[key] = p.generic_string();
  };
  put_path("wikidata_dump", wikidata_dump);
  put_path("wikipedia_dump", wikipedia_dump);
  put_path("allowlist", allowlist);
  put_path("ontology", ontology);
  put_path("paragraphs", paragraphs);
  put_path("annotated", annotated);
  put_path("templates", templates);
  put_path("samples", samples);
  put_path("train_samples", train_samples);
  put_path("train_ids", train_ids);
  put_path("eval_dump", eval_dump);
  put_path("train_ontology", train_ontology);
  put_path("gold", gold);
  put_path("pred", pred);
  put_path("partitions", partitions);
  put_path("scores", scores);
  put_path("out", out);
  if (seed) j["seed"] = *seed;
  j["language"] = language;
  if (snapshot_date) j["snapshot_date"] = format_date(*snapshot_date);
  j["eval_mode"] = eval_mode;
  j["cross"] = cross;
  j["split_name"] = split_name;
  j["min_arity"] = augment.min_arity;
  j["max_arity"] = augment.max_arity;
  j["title_thresholds"] = eval.title_thresholds;
  j["tokenizer"] = eval.tokenizer;
  j["carb_match_threshold"] = eval.carb_match_threshold;
  j["rephrasing_runs"] = eval.rephrasing_runs;
  j["parse_mode"] = eval.parse_mode == linearizer::Mode::kStrict ? "strict" : "lenient";
  return j;
}

json manifest(Stage stage, const PipelineConfig& config, const std::vector<fs::path>& inputs,
              const std::vector<fs::path>& outputs) {
  auto digests = [](const std::vector<fs::path>& paths) {
    json arr = json::array();
    for (const auto& p : paths) arr.push_back({{"path", p.generic_string()}, {"sha256", io::sha256_file(p)}});
    return arr;
  };
  return {{"stage", stage_name(stage)},
          {"tool", kToolName},
          {"version", kToolVersion},
          {"config", config.describe()},
          {"inputs", digests(inputs)},
          {"outputs", digests(outputs)}};
}

std::string prepare(Stage stage, PipelineConfig& c) {
  if (c.cache_dir.empty()) {
    const char* env = std::getenv(std::string(kCacheEnv).c_str());
    c.cache_dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("forge-cache");
  }
  if (c.out.empty() && stage != Stage::kSelfCheck) c.out = default_artifact(stage, c);
  if (c.jobs == 0) return "--jobs must be at least 1";
  if (auto e = c.eval.validate(); !e.empty()) return e;
  if (c.augment.min_arity < 1 || c.augment.min_arity > c.augment.max_arity) {
    return "arity bounds must satisfy 1 <= min <= max";
  }
  switch (stage) {
    case Stage::kIngestWikidata:
      if (c.wikidata_dump.empty()) return "ingest-wikidata requires --wikidata-dump";
      break;
    case Stage::kIngestWikipedia:
      if (c.wikipedia_dump.empty()) return "ingest-wikipedia requires --wikipedia-dump";
      break;
    case Stage::kAugment:
      if (!c.seed) return "augment requires --seed";
      if (c.templates.empty()) return "augment requires --templates";
      break;
    case Stage::kSplit: {
      const bool corpus = !c.train_ids.empty() || !c.eval_dump.empty();
      const bool labels = !c.train_samples.empty() || !c.train_ontology.empty();
      if (corpus == labels) {
        return "split takes either --train-ids and --eval-dump (corpus) or --train-samples and "
               "--train-ontology (partition labels)";
      }
      if (corpus && (c.train_ids.empty() || c.eval_dump.empty())) return "split needs both --train-ids and --eval-dump";
      if (labels && (c.train_samples.empty() || c.train_ontology.empty())) {
        return "split needs both --train-samples and --train-ontology";
      }
      break;
    }
    case Stage::kScore:
      if (c.pred.empty()) return "score requires --pred";
      break;
    default:
      break;
  }
  // Explicitly named inputs must exist before anything runs.
  for (const fs::path* p : {&c.wikidata_dump, &c.wikipedia_dump, &c.allowlist, &c.templates, &c.train_ids,
                            &c.eval_dump, &c.pred}) {
    if (!p->empty() && !fs::exists(*p)) return "input '" + p->string() + "' does not exist";
  }
  return {};
}

StageResult run_stage(Stage stage, PipelineConfig config) {
  if (auto e = prepare(stage, config); !e.empty()) throw StageError(e);
  if (!config.out.empty()) ensure_parent(config.out);
  switch (stage) {
    case Stage::kIngestWikidata: return ingest_wikidata(config);
    case Stage::kIngestWikipedia: return ingest_wikipedia(config);
    case Stage::kAlign: return align_stage(config);
    case Stage::kStats: return stats_stage(config);
    case Stage::kAugment: return augment_stage(config);
    case Stage::kSplit: return split_stage(config);
    case Stage::kScore: return score_stage(config);
    case Stage::kReport: return report_stage(config);
    case Stage::kSelfCheck: return selfcheck_stage(config);
  }
  throw StageError("unknown stage");
}

}  // namespace forge::pipeline
