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

// Stage orchestration behind the `forge` command. Stages talk to each other
// only through files; every artifact is written atomically and gets a
// `<artifact>.manifest.json` sibling with input digests and the config.

#ifndef FORGE_PIPELINE_HPP_
#define FORGE_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "forge/date.hpp"
#include "forge/evalsuite.hpp"
#include "forge/instructions.hpp"
#include "json.hpp"

namespace forge::pipeline {

inline constexpr std::string_view kToolName = "forge";
#ifdef FORGE_VERSION
inline constexpr std::string_view kToolVersion = FORGE_VERSION;
#else
inline constexpr std::string_view kToolVersion = "0.0.0";
#endif

inline constexpr std::string_view kCacheEnv = "FORGE_CACHE_DIR";

enum class Stage {
  kIngestWikidata,
  kIngestWikipedia,
  kAlign,
  kStats,
  kAugment,
  kSplit,
  kScore,
  kReport,
  kSelfCheck,
};

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

struct PipelineConfig {
  // Inputs. Empty paths fall back to the default artifact of the producing
  // stage inside the cache directory.
  std::filesystem::path wikidata_dump;
  std::filesystem::path wikipedia_dump;
  std::filesystem::path allowlist;
  std::filesystem::path ontology;
  std::filesystem::path paragraphs;
  std::filesystem::path annotated;
  std::filesystem::path templates;
  std::filesystem::path samples;
  std::filesystem::path train_samples;
  std::filesystem::path train_ids;
  std::filesystem::path eval_dump;
  std::filesystem::path train_ontology;
  std::filesystem::path gold;
  std::filesystem::path pred;
  std::filesystem::path partitions;
  std::filesystem::path scores;

  std::filesystem::path out;        // primary output; default under cache_dir
  std::filesystem::path cache_dir;  // default: $FORGE_CACHE_DIR or ./forge-cache

  std::optional<std::uint64_t> seed;
  std::string language = "en";
  std::optional<Date> snapshot_date;
  bool eval_mode = false;  // augment: add cross samples and rephrasing runs
  bool cross = true;       // augment in eval mode: emit cross-category samples
  std::string split_name = "Train";
  std::size_t jobs = 1;
  instructions::AugmentOptions augment;
  eval::EvalConfig eval;

  nlohmann::json describe() const;  // deterministic, for manifests
};

// Resolves defaults (cache dir from the environment) and checks that the
// configuration is coherent for `stage`. Returns an error message or "".
std::string prepare(Stage stage, PipelineConfig& config);

struct StageResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> outputs;
  std::string summary;  // one line for the terminal
};

// Runs one stage. Missing prerequisite artifacts raise StageError naming the
// stage that produces them.
StageResult run_stage(Stage stage, PipelineConfig config);

std::filesystem::path default_artifact(Stage producer, const PipelineConfig& config);

nlohmann::json manifest(Stage stage, const PipelineConfig& config,
                        const std::vector<std::filesystem::path>& inputs,
                        const std::vector<std::filesystem::path>& outputs);

// Order-preserving map over `items` with at most `jobs` worker threads. The
// first exception thrown by `fn` is rethrown after all workers stop.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& items, std::size_t jobs, Fn fn)
    -> std::vector<decltype(fn(items.front()))> {
  using R = decltype(fn(items.front()));
  std::vector<std::optional<R>> slots(items.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, items.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        slots[i].emplace(fn(items[i]));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = items.size();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(items.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace forge::pipeline

#endif  // FORGE_PIPELINE_HPP_
