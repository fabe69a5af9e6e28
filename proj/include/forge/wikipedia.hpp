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

#ifndef FORGE_WIKIPEDIA_HPP_
#define FORGE_WIKIPEDIA_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace forge::wikipedia {

struct ArticleRecord {
  std::int64_t page_id = 0;
  std::string title;
  std::chrono::sys_seconds revision_timestamp{};
  std::string wikitext;
};

// Offsets are unicode scalar indices into Paragraph::text, half-open.
struct AnchorSpan {
  std::string surface;
  std::string target_title;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::optional<std::string> qid;

  bool operator==(const AnchorSpan&) const = default;
};

enum class Quality : std::uint8_t {
  kClean = 0,
  // An unterminated template, table, comment or link ran to the end of the
  // lead and was stripped best-effort.
  kUnbalancedMarkup = 1,
};

struct Paragraph {
  std::string doc_id;
  std::string source_title;
  std::string text;
  std::vector<AnchorSpan> anchors;
  Quality quality = Quality::kClean;
  std::size_t unresolved_anchors = 0;

  bool operator==(const Paragraph&) const = default;
};

struct DumpIssue {
  std::int64_t page_id = 0;  // 0 when unknown
  std::string title;
  std::string reason;
};

// Pull parser over a MediaWiki XML export. Yields main-namespace,
// non-redirect pages in dump order; memory is bounded by the largest page.
// XML that stops being well-formed (including truncation) throws
// IngestError once every complete page before the fault has been returned.
class DumpReader {
 public:
  explicit DumpReader(std::istream& in);
  ~DumpReader();
  DumpReader(const DumpReader&) = delete;
  DumpReader& operator=(const DumpReader&) = delete;

  std::optional<ArticleRecord> next();

  // Pages skipped because a field was malformed (bad id, timestamp).
  const std::vector<DumpIssue>& issues() const;
  std::size_t pages_seen() const;
  std::size_t redirects_skipped() const;
  std::size_t non_article_skipped() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Convenience: drains a DumpReader.
std::vector<ArticleRecord> parse_wikipedia_dump(std::istream& in,
                                                std::vector<DumpIssue>* issues = nullptr);

// Plain text of everything before the first "==" heading, with anchor spans
// for [[target]] / [[target|surface]] links. Pure.
Paragraph extract_leading_paragraph(std::string_view wikitext);

// Attaches qids to anchors whose normalised target is in `title_index` and
// drops the rest, counting them in `unresolved_anchors`.
Paragraph resolve_anchor_targets(Paragraph paragraph,
                                 const std::map<std::string, std::string>& title_index);

inline constexpr std::string_view kOffsetUnit = "unicode_scalar";

nlohmann::json to_json(const Paragraph& p);
Paragraph paragraph_from_json(const nlohmann::json& j);
void write_paragraphs_header(std::ostream& out);

}  // namespace forge::wikipedia

#endif  // FORGE_WIKIPEDIA_HPP_
