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

// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (0 when everything holds).

#include <fcntl.h>
#include <spawn.h>
#include <unistd.h>
#include <sys/resource.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "forge/evalsuite.hpp"
#include "forge/instructions.hpp"
#include "forge/linearizer.hpp"
#include "forge/log.hpp"
#include "forge/splitter.hpp"
#include "pipeline_driver.hpp"
#include "support.hpp"

extern char** environ;

namespace {

namespace fs = std::filesystem;
using namespace forge;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
  std::vector<nlohmann::json> out;
  auto in = io::open_input(p);
  io::for_each_jsonl(*in, [&](const nlohmann::json& j) { out.push_back(j); });
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome fixture_exactness() {
  const auto start = std::chrono::steady_clock::now();
  const testing::FixtureRun run = testing::run_fixture_pipeline(testing::scratch_dir("acceptance_fixture"));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto totals = [](const fs::path& p) {
    std::size_t docs = 0, mentions = 0, triplets = 0;
    for (const auto& j : read_jsonl(p)) {
      const auto d = align::document_from_json(j);
      ++docs;
      mentions += d.mentions.size();
      triplets += d.triplets.size();
    }
    return std::array<std::size_t, 3>{docs, mentions, triplets};
  };
  const auto train = totals(run.train("annotated.jsonl"));
  const auto eval = totals(run.eval("annotated.jsonl"));
  const std::string stats = testing::slurp(run.train("stats.tsv"));
  const bool counts_ok = train == std::array<std::size_t, 3>{8, 21, 9} && eval == std::array<std::size_t, 3>{2, 7, 2};
  // Hand counts over the 21 training mentions: 21 carry a description
  // (100.0%), 17 aliases (81.0%) and 20 a type (95.2%).
  const bool stats_ok = stats.find("Train\t8\t21\t9\t11\t10\t2\t5\t100.0\t81.0\t95.2\n") != std::string::npos;
  Outcome o;
  o.pass = counts_ok && stats_ok && seconds < 5.0;
  o.detail = "train docs/mentions/triplets " + std::to_string(train[0]) + "/" + std::to_string(train[1]) + "/" +
             std::to_string(train[2]) + ", eval " + std::to_string(eval[0]) + "/" + std::to_string(eval[1]) + "/" +
             std::to_string(eval[2]) + ", stats row " + (stats_ok ? "exact" : "MISMATCH") + ", " +
             fmt("%.2f s", seconds);
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome rouge_oracle() {
  std::mt19937_64 rng(20240601);
  const std::vector<std::string> vocab = {"atp", "tour", "2023", "camp", "nou", "fc", "the", "of"};
  std::uniform_int_distribution<std::size_t> len(0, 8), pick(0, vocab.size() - 1);
  std::size_t mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    eval::Tokens a, b;
    for (std::size_t n = len(rng); n > 0; --n) a.push_back(vocab[pick(rng)]);
    for (std::size_t n = len(rng); n > 0; --n) b.push_back(vocab[pick(rng)]);
    const double expected =
        a.empty() || b.empty()
            ? 0.0
            : 2.0 * static_cast<double>(testing::brute_force_lcs(a, b)) / static_cast<double>(a.size() + b.size());
    if (std::abs(eval::rouge_l_f1(a, b) - expected) > 1e-12) ++mismatches;
  }
  const double atp = eval::rouge_l_f1("ATP Tour", "2023 ATP Tour");
  return {mismatches == 0 && atp == 0.8,
          std::to_string(mismatches) + " mismatches in 10000 pairs; ATP Tour vs 2023 ATP Tour = " + fmt("%.17g", atp)};
}

// 3 -------------------------------------------------------------------------
Outcome perfect_identity(const testing::FixtureRun& run) {
  const eval::EvalConfig cfg;
  std::vector<eval::SampleScore> scores;
  std::size_t imperfect = 0;
  for (const fs::path& p : {run.train("samples.jsonl"), run.eval("eval_samples.jsonl")}) {
    for (const auto& j : read_jsonl(p)) {
      const eval::GoldSample g = eval::gold_from_json(j);
      eval::SampleScore s = eval::score_sample(linearizer::serialize(g.target), g, std::nullopt, cfg);
      bool ok = s.parsed && !s.diagnostics.json_error && !s.diagnostics.number_failed && !s.diagnostics.type_failed;
      for (const auto& [key, counts] : s.counts) ok = ok && counts.prf().f1 == 1.0;
      ok = ok && (!s.description.mean() || *s.description.mean() == 1.0);
      imperfect += !ok;
      scores.push_back(std::move(s));
    }
  }
  const eval::EvalReport report = eval::aggregate_report(scores, cfg);
  std::size_t rows_below_one = 0;
  for (const auto& row : report.rows) {
    for (const auto& v : {row.precision, row.recall, row.f1}) rows_below_one += v && *v != 1.0;
  }
  double json_rate = -1.0;
  for (const auto& d : report.diagnostics) {
    if (d.category == eval::kMacroAverage && d.json_error_rate) json_rate = *d.json_error_rate;
  }
  return {imperfect == 0 && rows_below_one == 0 && json_rate == 0.0,
          std::to_string(scores.size()) + " samples, " + std::to_string(imperfect) + " imperfect, " +
              std::to_string(rows_below_one) + " report cells below 1.0, JSON error rate " + fmt("%.3f", json_rate)};
}

// 4 -------------------------------------------------------------------------
Outcome openre_oracle(const testing::FixtureRun& run) {
  // Every ordered pair of fixture targets, and every target against itself
  // with its relations replaced by its neighbours', as (pred, gold).
  std::vector<std::vector<eval::FlatTriplet>> targets;
  for (const fs::path& p : {run.train("samples.jsonl"), run.eval("eval_samples.jsonl")}) {
    for (const auto& j : read_jsonl(p)) {
      auto flat = eval::flatten(eval::gold_from_json(j).target.triplets);
      if (!flat.empty() && flat.size() <= 4) targets.push_back(std::move(flat));
    }
  }
  std::size_t instances = 0, unequal = 0;
  auto check = [&](const std::vector<eval::FlatTriplet>& pred, const std::vector<eval::FlatTriplet>& gold) {
    std::vector<std::vector<double>> s(pred.size(), std::vector<double>(gold.size()));
    for (std::size_t r = 0; r < pred.size(); ++r)
      for (std::size_t c = 0; c < gold.size(); ++c) s[r][c] = eval::triplet_match_score(pred[r], gold[c]);
    double greedy = 0.0;
    for (auto [r, c] : eval::greedy_assignment(s)) greedy += s[r][c];
    ++instances;
    if (std::abs(greedy - testing::optimal_assignment_total(s)) > 1e-12) ++unequal;
  };
  for (const auto& a : targets) {
    for (const auto& b : targets) check(a, b);
    auto rotated = a;
    for (std::size_t i = 0; i < rotated.size(); ++i) rotated[i].relation = a[(i + 1) % a.size()].relation;
    check(rotated, a);
  }
  const double camp = eval::triplet_match_score({"Camp Nou", "home venue", "Barcelona"},
                                                {"Camp Nou", "home venue of", "FC Barcelona"});
  return {unequal == 0 && instances > 0 && std::abs(camp - 0.822) <= 1e-3,
          std::to_string(unequal) + " of " + std::to_string(instances) +
              " fixture instances where greedy differs from optimal; Camp Nou pair = " + fmt("%.4f", camp)};
}

// 5 -------------------------------------------------------------------------
Outcome round_trip() {
  std::mt19937_64 rng(555);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const align::AnnotatedDocument d = testing::random_rich_document(rng);
    const auto outcome = linearizer::parse_and_validate(linearizer::serialize(d));
    const auto* ok = std::get_if<linearizer::Ok>(&outcome);
    failures += ok == nullptr || !(ok->value == linearizer::project(d));
  }
  return {failures == 0, std::to_string(failures) + " of 1000 documents failed the round trip"};
}

// 6 -------------------------------------------------------------------------
Outcome filter_oracle() {
  std::mt19937_64 rng(606);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    testing::RandomWorld w = testing::random_world(rng);
    const align::AnnotatedDocument d = testing::random_document(rng, w);
    const auto c = instructions::kAllCategories[rng() % instructions::kAllCategories.size()];
    instructions::InstructionSpec s{c, {}, {}, {}, {}};
    if (instructions::takes_types(c)) {
      const std::string t = w.type_qids[rng() % w.type_qids.size()];
      s.type_qids = {t};
      s.types = {*w.ontology.at(t).label};
    }
    if (instructions::takes_descriptions(c)) s.descriptions = {"description " + std::to_string(rng() % 3 + 1)};
    if (instructions::takes_number(c)) s.k = rng() % 8 + 1;
    const auto r = instructions::filter_by_instruction(d, s, w.ontology);
    using Key = std::tuple<std::size_t, std::size_t, std::vector<std::string>>;
    std::set<Key> got, want;
    for (const auto& t : r.document.triplets) got.insert({r.kept.at(t.head_idx), r.kept.at(t.tail_idx), t.relations});
    const std::set<std::size_t> kept(r.kept.begin(), r.kept.end());
    for (const auto& t : d.triplets) {
      if (kept.contains(t.head_idx) && kept.contains(t.tail_idx)) want.insert({t.head_idx, t.tail_idx, t.relations});
    }
    failures += got != want || got.size() != r.document.triplets.size();
  }
  return {failures == 0, std::to_string(failures) + " of 1000 (document, spec) pairs disagree with the recomputation"};
}

// 7 -------------------------------------------------------------------------
Outcome determinism() {
  const fs::path root = testing::scratch_dir("acceptance_determinism");
  auto snapshot = [&] {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = testing::slurp(e.path());
    }
    return files;
  };
  testing::run_fixture_pipeline(root, 1, 7);
  const auto first = snapshot();
  fs::remove_all(root);
  testing::run_fixture_pipeline(root, 3, 7);
  const auto second = snapshot();
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    differing += it == second.end() || it->second != bytes;
  }
  differing += second.size() > first.size() ? second.size() - first.size() : 0;
  return {differing == 0 && first.contains("eval/report.tsv") && first.contains("train/samples.jsonl"),
          std::to_string(first.size()) + " artifacts compared across runs (1 and 3 threads), " +
              std::to_string(differing) + " differ"};
}

// 8 -------------------------------------------------------------------------
Outcome open_world_split(const testing::FixtureRun& run) {
  std::set<std::int64_t> train_ids;
  {
    auto in = io::open_input(testing::fixture("wikipedia_train.xml"));
    for (const auto& a : wikipedia::parse_wikipedia_dump(*in)) train_ids.insert(a.page_id);
  }
  std::vector<std::int64_t> corpus_ids;
  bool disjoint = true;
  for (const auto& j : read_jsonl(run.eval("corpus.jsonl"))) {
    corpus_ids.push_back(j["page_id"].get<std::int64_t>());
    disjoint = disjoint && !train_ids.contains(corpus_ids.back());
  }
  // Label check: every gold mention is unseen exactly when its qid is absent
  // from the training snapshot.
  const wikidata::Ontology train_onto = wikidata::load_snapshot(run.train("ontology.snap.jsonl"));
  const auto samples = read_jsonl(run.eval("eval_samples.jsonl"));
  const auto labels = read_jsonl(run.eval("partitions.jsonl"));
  bool labels_exact = samples.size() == labels.size();
  std::optional<std::size_t> denominator;
  for (std::size_t i = 0; labels_exact && i < samples.size(); ++i) {
    const auto qids = samples[i]["mention_qids"].get<std::vector<std::string>>();
    const auto l = splitter::labels_from_json(labels[i]);
    labels_exact = labels_exact && l.entities.size() == qids.size();
    for (std::size_t m = 0; labels_exact && m < qids.size(); ++m) {
      const bool unseen = !train_onto.contains(qids[m]);
      labels_exact = (l.entities[m] == splitter::Partition::kUnseen) == unseen;
    }
    // The Default sample of the engineered article: 5 gold mentions, 2 new.
    if (samples[i]["doc_id"] == "200" && samples[i]["category"] == "Default" && samples[i]["run"] == 0) {
      const eval::GoldSample g = eval::gold_from_json(samples[i]);
      const auto s = eval::score_sample(linearizer::serialize(g.target), g, l, eval::EvalConfig{});
      denominator = s.entity_partitions.at({eval::Task::kMentionDetection, 0.0}).denominator(splitter::Partition::kUnseen);
      if (g.target.entities.size() != 5) denominator.reset();
    }
  }
  const bool pass = disjoint && corpus_ids == std::vector<std::int64_t>{200, 201} && labels_exact && denominator == 2u;
  return {pass, "corpus pages " + std::to_string(corpus_ids.size()) + " (disjoint: " + (disjoint ? "yes" : "no") +
                    "), labels " + (labels_exact ? "exact" : "WRONG") + ", unseen-mention denominator " +
                    (denominator ? std::to_string(*denominator) : std::string("n/a"))};
}

// 9 -------------------------------------------------------------------------
void write_synthetic_dump(const fs::path& path, std::size_t lines) {
  std::ofstream out(path, std::ios::binary);
  out << "[\n";
  for (std::size_t i = 1; i <= lines; ++i) {
    const std::string q = "Q" + std::to_string(i);
    out << R"({"type":"item","id":")" << q << R"(","labels":{"en":{"language":"en","value":"Entity )" << i
        << R"("},"de":{"language":"de","value":"Ding )" << i << R"("}},"descriptions":{"en":{"language":"en","value":"synthetic entity number )"
        << i << R"("}},"aliases":{"en":[{"language":"en","value":"E)" << i << R"("}]},"claims":{"P31":[{"mainsnak":{"snaktype":"value","property":"P31","datavalue":{"value":{"entity-type":"item","numeric-id":5,"id":"Q5"},"type":"wikibase-entityid"}},"type":"statement","rank":"normal"}]},"sitelinks":{"enwiki":{"site":"enwiki","title":"Entity )"
        << i << R"("}}})" << (i == lines ? "\n" : ",\n");
  }
  out << "]\n";
}

// Peak RSS in KiB of `forge ingest-wikidata` over `dump`.
long ingest_peak_rss_kib(const fs::path& dump, const fs::path& allowlist, const fs::path& cache) {
  std::vector<std::string> args = {FORGE_BINARY, "ingest-wikidata", "--wikidata-dump", dump.string(),
                                   "--allowlist", allowlist.string(), "--cache-dir", cache.string(),
                                   "--log-level", "error"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t quiet;
  posix_spawn_file_actions_init(&quiet);
  posix_spawn_file_actions_addopen(&quiet, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, FORGE_BINARY, &quiet, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&quiet);
  if (rc != 0) return -1;
  int status = 0;
  rusage usage{};
  if (wait4(pid, &status, 0, &usage) != pid || !WIFEXITED(status) || WEXITSTATUS(status) != 0) return -1;
  return usage.ru_maxrss;
}

Outcome streaming_bound() {
  const fs::path dir = testing::scratch_dir("acceptance_streaming");
  {
    std::ofstream allow(dir / "allowlist.txt");
    for (std::size_t i = 0; i < 100; ++i) {
      allow << "Q" << 1 + i * 997 << '\n';
    }
  }
  write_synthetic_dump(dir / "small.json", 10000);
  write_synthetic_dump(dir / "large.json", 100000);
  const long small = ingest_peak_rss_kib(dir / "small.json", dir / "allowlist.txt", dir / "small");
  const long large = ingest_peak_rss_kib(dir / "large.json", dir / "allowlist.txt", dir / "large");
  const long budget = static_cast<long>(FORGE_RSS_BUDGET_MB) * 1024;
  std::size_t kept = 0;
  if (large > 0) kept = wikidata::load_snapshot(dir / "large" / "ontology.snap.jsonl").size();
  // Independence from line count: 10x the lines may not add more than 2 MiB.
  const bool pass = small > 0 && large > 0 && large < budget && large - small < 2048 && kept == 100;
  return {pass, "peak RSS " + std::to_string(large / 1024) + " MiB at 100000 lines vs " +
                    std::to_string(small / 1024) + " MiB at 10000 lines (budget " +
                    std::to_string(FORGE_RSS_BUDGET_MB) + " MiB), " + std::to_string(kept) + " entities kept"};
}

// 10 ------------------------------------------------------------------------
Outcome diagnostics() {
  using instructions::Category;
  using linearizer::TargetEntity;
  using linearizer::TargetObject;
  const eval::EvalConfig cfg;
  auto entity = [](std::string m, std::vector<std::string> types) {
    return TargetEntity{m, m, std::move(types), std::nullopt, {}};
  };
  auto gold = [](std::string id, Category c, TargetObject t, std::optional<std::size_t> k,
                 std::vector<std::string> types) {
    eval::GoldSample g;
    g.sample_id = std::move(id);
    g.spec = {c, std::move(types), {}, {}, k};
    g.target = std::move(t);
    return g;
  };
  const TargetObject two{{entity("Berlin", {"city"}), entity("Paris", {"city"})}, {}};
  std::vector<eval::SampleScore> scores;
  // Default: 1 malformed of 4.
  for (int i = 0; i < 3; ++i)
    scores.push_back(eval::score_sample(linearizer::serialize(two), gold("d", Category::kDefault, two, {}, {}),
                                        std::nullopt, cfg));
  scores.push_back(eval::score_sample(R"({"entities": [{"mention": "Berlin"})", gold("d", Category::kDefault, two, {}, {}),
                                      std::nullopt, cfg));
  // Number (k = 2): counts 2, 1, 3, 2 -> 2 of 4 miss k.
  const TargetObject one{{entity("Berlin", {"city"})}, {}};
  const TargetObject three{{entity("Berlin", {"city"}), entity("Paris", {"city"}), entity("Rome", {"city"})}, {}};
  for (const TargetObject* p : {&two, &one, &three, &two})
    scores.push_back(eval::score_sample(linearizer::serialize(*p), gold("n", Category::kNumber, two, 2, {}),
                                        std::nullopt, cfg));
  // Base type "city": 1 of 4 outputs names a country.
  const TargetObject off{{entity("Berlin", {"city"}), entity("Germany", {"country"})}, {}};
  for (const TargetObject* p : {&two, &two, &off, &one})
    scores.push_back(eval::score_sample(linearizer::serialize(*p), gold("t", Category::kBaseType, two, {}, {"city"}),
                                        std::nullopt, cfg));
  const eval::EvalReport r = eval::aggregate_report(scores, cfg);
  std::map<std::string, eval::DiagnosticRow> rows;
  for (const auto& d : r.diagnostics) rows[d.category] = d;
  const bool pass = rows["Default"].json_error_rate == 0.25 && rows["Number"].number_failure_rate == 0.5 &&
                    rows["Number"].json_error_rate == 0.0 && rows["Base Type"].type_failure_rate == 0.25 &&
                    !rows["Default"].number_failure_rate && !rows["Number"].type_failure_rate;
  auto show = [](const std::optional<double>& v) { return v ? fmt("%.4f", *v) : std::string("--"); };
  return {pass, "JSON error " + show(rows["Default"].json_error_rate) + " (want 0.25), k-mismatch " +
                    show(rows["Number"].number_failure_rate) + " (want 0.5), type violation " +
                    show(rows["Base Type"].type_failure_rate) + " (want 0.25)"};
}

}  // namespace

int main() {
  forge::log::set_min_level(forge::log::Level::kError);
  const testing::FixtureRun run = testing::run_fixture_pipeline(testing::scratch_dir("acceptance_shared"));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fixture pipeline exactness", fixture_exactness},
      {"ROUGE-L oracle", rouge_oracle},
      {"perfect-prediction identity", [&] { return perfect_identity(run); }},
      {"OpenRE matcher oracle", [&] { return openre_oracle(run); }},
      {"serialization round trip", round_trip},
      {"filtering correctness", filter_oracle},
      {"determinism", determinism},
      {"open-world split", [&] { return open_world_split(run); }},
      {"streaming memory bound", streaming_bound},
      {"instruction-following diagnostics", diagnostics},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail << '\n';
  }
  return failed;
}
