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

// Shared oracles and generators for the unit and acceptance suites. The
// oracles here are deliberately naive so they stay independent of the
// library code they check.

#ifndef FORGE_TESTS_SUPPORT_HPP_
#define FORGE_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "forge/align.hpp"
#include "forge/text.hpp"
#include "forge/wikidata.hpp"

namespace forge::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(FORGE_FIXTURE_DIR) / name;
}

inline std::filesystem::path templates_file() { return std::filesystem::path(FORGE_TEMPLATE_FILE); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(FORGE_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Longest common subsequence by enumerating every subsequence of `a`.
// Exponential, fine for lengths up to ~12.
inline std::size_t brute_force_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto len = static_cast<std::size_t>(__builtin_popcount(mask));
    if (len <= best) continue;
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j;
    }
    if (ok) best = len;
  }
  return best;
}

// Maximum total score of a one-to-one assignment, by trying every
// permutation of the wider side.
inline double optimal_assignment_total(const std::vector<std::vector<double>>& s) {
  const std::size_t rows = s.size();
  const std::size_t cols = rows == 0 ? 0 : s[0].size();
  if (rows == 0 || cols == 0) return 0.0;
  const std::size_t n = std::max(rows, cols);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (perm[r] < cols) total += s[r][perm[r]];
    }
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Random strings that stress JSON escaping and multi-byte text.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_len, bool allow_empty = false) {
  static const std::vector<std::string> kPieces = {
      "a", "b", "Z", "9", " ", "\"", "\\", "/", "\n", "\t", "é", "ß", "北", "京", "😀", "'", "{", "}", "[", "]",
      ":", ",", "\x01", "x", "tour", "ATP"};
  std::uniform_int_distribution<std::size_t> len(allow_empty ? 0 : 1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, kPieces.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += kPieces[pick(rng)];
  return s;
}

// A small random ontology: `n_types` type entities in a two-level
// hierarchy and `n_entities` instances with random types, descriptions and
// sitelink counts.
struct RandomWorld {
  wikidata::Ontology ontology;
  std::vector<std::string> type_qids;
  std::vector<std::string> entity_qids;
};

inline RandomWorld random_world(std::mt19937_64& rng, std::size_t n_types = 6, std::size_t n_entities = 12) {
  RandomWorld w;
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t i = 0; i < n_types; ++i) {
    wikidata::EntityRecord t;
    t.qid = "Q" + std::to_string(1000 + i);
    t.label = "type" + std::to_string(i);
    if (i >= 2) t.subclass_of.push_back("Q" + std::to_string(1000 + i % 2));
    if (i >= 4 && coin(rng)) t.subclass_of.push_back("Q" + std::to_string(1000 + (i + 1) % 2));
    w.type_qids.push_back(t.qid);
    w.ontology.add_entity(std::move(t));
  }
  std::uniform_int_distribution<std::size_t> type_pick(0, n_types - 1);
  std::uniform_int_distribution<std::size_t> ntypes(0, 2);
  std::uniform_int_distribution<std::size_t> sitelinks(0, 5);
  std::uniform_int_distribution<int> desc_pick(0, 3);
  for (std::size_t i = 0; i < n_entities; ++i) {
    wikidata::EntityRecord e;
    e.qid = "Q" + std::to_string(1 + i * 7);
    e.label = "Entity " + std::to_string(i);
    const int d = desc_pick(rng);
    if (d > 0) e.description = "description " + std::to_string(d);
    for (std::size_t k = ntypes(rng); k > 0; --k) {
      const std::string t = w.type_qids[type_pick(rng)];
      if (std::find(e.instance_of.begin(), e.instance_of.end(), t) == e.instance_of.end()) e.instance_of.push_back(t);
    }
    e.sitelink_count = sitelinks(rng);
    w.entity_qids.push_back(e.qid);
    w.ontology.add_entity(std::move(e));
  }
  return w;
}

// Random document over `world`: mentions in span order, distinct random
// triplets between mention indices.
inline align::AnnotatedDocument random_document(std::mt19937_64& rng, const RandomWorld& world,
                                                std::size_t max_mentions = 7) {
  align::AnnotatedDocument doc;
  doc.doc_id = "doc" + std::to_string(rng() % 100000);
  std::uniform_int_distribution<std::size_t> count(0, max_mentions);
  std::uniform_int_distribution<std::size_t> pick(0, world.entity_qids.size() - 1);
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string qid = world.entity_qids[pick(rng)];
    align::MentionAnnotation m;
    m.surface = "M" + std::to_string(i) + "_" + qid;
    if (!doc.text.empty()) doc.text += ' ';
    m.char_start = text::scalar_length(doc.text);
    doc.text += m.surface;
    m.char_end = text::scalar_length(doc.text);
    m.profile = wikidata::resolve_entity_profile(qid, world.ontology);
    doc.mentions.push_back(std::move(m));
  }
  if (n >= 2) {
    std::uniform_int_distribution<std::size_t> idx(0, n - 1);
    std::uniform_int_distribution<std::size_t> nt(0, n);
    for (std::size_t t = nt(rng); t > 0; --t) {
      const std::size_t h = idx(rng), tl = idx(rng);
      if (h == tl) continue;
      bool dup = false;
      for (const auto& x : doc.triplets) dup = dup || (x.head_idx == h && x.tail_idx == tl);
      if (dup) continue;
      doc.triplets.push_back({h, tl, {"rel" + std::to_string(rng() % 3)}});
    }
  }
  return doc;
}

// Document whose every string field is random text (quotes, escapes,
// control and astral characters); used for serialization round trips.
inline align::AnnotatedDocument random_rich_document(std::mt19937_64& rng) {
  align::AnnotatedDocument doc;
  doc.doc_id = random_text(rng, 4);
  std::uniform_int_distribution<std::size_t> count(0, 6), small(0, 3);
  std::uniform_int_distribution<int> coin(0, 1);
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    align::MentionAnnotation m;
    m.surface = random_text(rng, 5);
    doc.text += random_text(rng, 3, true);
    m.char_start = text::scalar_length(doc.text);
    doc.text += m.surface;
    m.char_end = text::scalar_length(doc.text);
    m.profile.qid = "Q" + std::to_string(rng() % 1000 + 1);
    m.profile.title = random_text(rng, 6);
    for (std::size_t k = small(rng); k > 0; --k) {
      m.profile.types.push_back(random_text(rng, 4));
      m.profile.type_qids.push_back("Q" + std::to_string(rng() % 50 + 1));
    }
    if (coin(rng)) m.profile.description = random_text(rng, 8, true);
    for (std::size_t k = small(rng); k > 0; --k) m.profile.aliases.push_back(random_text(rng, 4, true));
    doc.mentions.push_back(std::move(m));
  }
  if (n >= 2) {
    std::uniform_int_distribution<std::size_t> idx(0, n - 1);
    for (std::size_t t = small(rng); t > 0; --t) {
      const std::size_t h = idx(rng), tl = idx(rng);
      if (h == tl) continue;
      std::vector<std::string> rels;
      for (std::size_t k = small(rng) + 1; k > 0; --k) rels.push_back(random_text(rng, 4));
      doc.triplets.push_back({h, tl, rels});
    }
  }
  return doc;
}

}  // namespace forge::testing

#endif  // FORGE_TESTS_SUPPORT_HPP_
