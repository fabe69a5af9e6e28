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

#include "forge/wikipedia.hpp"

#include <expat.h>

#include <array>
#include <charconv>

#include "forge/date.hpp"
#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/log.hpp"
#include "forge/text.hpp"

namespace forge::wikipedia {

// ---------------------------------------------------------------------------
// XML dump reader

namespace {

enum class Field { kNone, kTitle, kNs, kPageId, kTimestamp, kText };

struct PageBuilder {
  std::string title;
  std::string ns;
  std::string page_id;
  std::string timestamp;
  std::string text;
  bool redirect = false;
  bool have_page_id = false;
};

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = text::trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

struct DumpReader::State {
  std::istream* in = nullptr;
  XML_Parser parser = nullptr;
  std::deque<ArticleRecord> ready;
  std::vector<DumpIssue> issues;
  std::size_t pages_seen = 0;
  std::size_t redirects = 0;
  std::size_t non_article = 0;

  bool in_page = false;
  bool in_revision = false;
  int depth_in_page = 0;
  Field field = Field::kNone;
  PageBuilder page;

  bool finished = false;
  std::optional<std::string> error;
  std::array<char, 1 << 16> buf{};

  void start(const XML_Char* name, const XML_Char** attrs) {
    const std::string_view n(name);
    if (n == "page") {
      in_page = true;
      depth_in_page = 0;
      page = PageBuilder{};
      return;
    }
    if (!in_page) return;
    ++depth_in_page;
    if (n == "revision") {
      in_revision = true;
      // Full-history dumps: the last revision wins.
      page.text.clear();
      page.timestamp.clear();
    } else if (n == "title" && depth_in_page == 1) {
      field = Field::kTitle;
    } else if (n == "ns" && depth_in_page == 1) {
      field = Field::kNs;
    } else if (n == "id" && depth_in_page == 1) {
      field = Field::kPageId;
      page.have_page_id = true;
    } else if (n == "redirect" && depth_in_page == 1) {
      page.redirect = true;
    } else if (n == "timestamp" && in_revision) {
      field = Field::kTimestamp;
    } else if (n == "text" && in_revision) {
      field = Field::kText;
    }
    (void)attrs;
  }

  void end(const XML_Char* name) {
    const std::string_view n(name);
    if (n == "page" && in_page) {
      in_page = false;
      finish_page();
      return;
    }
    if (!in_page) return;
    --depth_in_page;
    if (n == "revision") in_revision = false;
    field = Field::kNone;
  }

  void chars(const XML_Char* s, int len) {
    switch (field) {
      case Field::kTitle: page.title.append(s, len); break;
      case Field::kNs: page.ns.append(s, len); break;
      case Field::kPageId: page.page_id.append(s, len); break;
      case Field::kTimestamp: page.timestamp.append(s, len); break;
      case Field::kText: page.text.append(s, len); break;
      case Field::kNone: break;
    }
  }

  void finish_page() {
    ++pages_seen;
    auto id = parse_int(page.page_id);
    if (!page.have_page_id || !id || *id <= 0) {
      issues.push_back({0, page.title, "missing or malformed page id '" + page.page_id + "'"});
      return;
    }
    std::int64_t ns = 0;
    if (!text::trim(page.ns).empty()) {
      auto parsed = parse_int(page.ns);
      if (!parsed) {
        issues.push_back({*id, page.title, "malformed namespace '" + page.ns + "'"});
        return;
      }
      ns = *parsed;
    }
    if (ns != 0) {
      ++non_article;
      return;
    }
    if (page.redirect) {
      ++redirects;
      return;
    }
    auto ts = parse_timestamp(text::trim(page.timestamp));
    if (!ts) {
      issues.push_back({*id, page.title, "malformed revision timestamp '" + page.timestamp + "'"});
      return;
    }
    ArticleRecord rec;
    rec.page_id = *id;
    rec.title = std::move(page.title);
    rec.revision_timestamp = *ts;
    rec.wikitext = std::move(page.text);
    ready.push_back(std::move(rec));
  }

  static void on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<State*>(self)->start(name, attrs);
  }
  static void on_end(void* self, const XML_Char* name) { static_cast<State*>(self)->end(name); }
  static void on_chars(void* self, const XML_Char* s, int len) {
    static_cast<State*>(self)->chars(s, len);
  }

  void feed() {
    in->read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize n = in->gcount();
    if (in->bad()) {
      error = "read error in XML dump";
      finished = true;
      return;
    }
    const bool last = n < static_cast<std::streamsize>(buf.size());
    if (XML_Parse(parser, buf.data(), static_cast<int>(n), last ? 1 : 0) == XML_STATUS_ERROR) {
      error = std::string("XML error at line ") +
              std::to_string(XML_GetCurrentLineNumber(parser)) + ": " +
              XML_ErrorString(XML_GetErrorCode(parser));
      finished = true;
      return;
    }
    if (last) finished = true;
  }
};

DumpReader::DumpReader(std::istream& in) : state_(std::make_unique<State>()) {
  state_->in = &in;
  state_->parser = XML_ParserCreate("UTF-8");
  if (state_->parser == nullptr) throw IngestError("cannot create XML parser");
  XML_SetUserData(state_->parser, state_.get());
  XML_SetElementHandler(state_->parser, &State::on_start, &State::on_end);
  XML_SetCharacterDataHandler(state_->parser, &State::on_chars);
}

DumpReader::~DumpReader() {
  if (state_ && state_->parser) XML_ParserFree(state_->parser);
}

std::optional<ArticleRecord> DumpReader::next() {
  while (state_->ready.empty() && !state_->finished) state_->feed();
  if (!state_->ready.empty()) {
    ArticleRecord rec = std::move(state_->ready.front());
    state_->ready.pop_front();
    return rec;
  }
  if (state_->error) {
    std::string msg = *state_->error;
    state_->error.reset();
    throw IngestError(msg);
  }
  return std::nullopt;
}

const std::vector<DumpIssue>& DumpReader::issues() const { return state_->issues; }
std::size_t DumpReader::pages_seen() const { return state_->pages_seen; }
std::size_t DumpReader::redirects_skipped() const { return state_->redirects; }
std::size_t DumpReader::non_article_skipped() const { return state_->non_article; }

std::vector<ArticleRecord> parse_wikipedia_dump(std::istream& in, std::vector<DumpIssue>* issues) {
  DumpReader reader(in);
  std::vector<ArticleRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  for (const DumpIssue& issue : reader.issues()) {
    log::warning("skipped page " + std::to_string(issue.page_id) + " '" + issue.title +
                 "': " + issue.reason);
  }
  if (issues) *issues = reader.issues();
  return out;
}

// ---------------------------------------------------------------------------
// Wikitext lead extraction

namespace {

bool starts_at(std::string_view s, std::size_t i, std::string_view p) {
  return s.substr(i, p.size()) == p;
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }

// Plain-text sink that collapses whitespace as it goes, so offsets recorded
// while writing stay valid.
class TextBuilder {
 public:
  void put(std::string_view s) {
    for (char c : s) put(c);
  }

  void put(char c) {
    if (c == '\r' || c == '\t' || c == '\f' || c == '\v') c = ' ';
    if (c == ' ') {
      if (out_.empty() || out_.back() == ' ' || out_.back() == '\n') return;
      out_.push_back(' ');
      return;
    }
    if (c == '\n') {
      if (out_.empty()) return;
      if (out_.back() == ' ') out_.pop_back();
      if (out_.empty() || out_.back() == '\n') return;
      out_.push_back('\n');
      return;
    }
    out_.push_back(c);
  }

  std::size_t size() const { return out_.size(); }
  std::string finish() {
    while (!out_.empty() && (out_.back() == ' ' || out_.back() == '\n')) out_.pop_back();
    return std::move(out_);
  }

 private:
  std::string out_;
};

struct ByteAnchor {
  std::string surface;
  std::string target;
  std::size_t begin = 0;
  std::size_t end = 0;
};

constexpr std::string_view kDroppedNamespaces[] = {"file:", "image:", "category:", "media:"};
constexpr std::string_view kContentTags[] = {"ref",   "math",           "gallery", "timeline",
                                             "score", "syntaxhighlight", "imagemap", "references",
                                             "chem",  "hiero"};

struct Entity {
  std::string_view name;
  std::string_view utf8;
};
constexpr Entity kEntities[] = {
    {"amp", "&"},          {"lt", "<"},           {"gt", ">"},
    {"quot", "\""},        {"apos", "'"},         {"nbsp", " "},
    {"ndash", "–"},   {"mdash", "—"},   {"minus", "−"},
    {"thinsp", " "},       {"ensp", " "},         {"emsp", " "},
};

class LeadExtractor {
 public:
  LeadExtractor(std::string_view src, bool top_level) : src_(src), top_level_(top_level) {}

  void run() {
    std::size_t i = 0;
    while (i < src_.size() && !stopped_) i = step(i);
  }

  TextBuilder& builder() { return out_; }
  std::vector<ByteAnchor>& anchors() { return anchors_; }
  bool unbalanced() const { return unbalanced_; }

 private:
  bool at_line_start(std::size_t i) const { return i == 0 || src_[i - 1] == '\n'; }

  void stop_unbalanced() {
    unbalanced_ = true;
    stopped_ = true;
  }

  // Returns the index just past the balanced region opened at `i`, or npos.
  std::size_t skip_balanced(std::size_t i, std::string_view open, std::string_view close) const {
    int depth = 0;
    std::size_t j = i;
    while (j < src_.size()) {
      if (starts_at(src_, j, open)) {
        ++depth;
        j += open.size();
      } else if (starts_at(src_, j, close)) {
        --depth;
        j += close.size();
        if (depth == 0) return j;
      } else {
        ++j;
      }
    }
    return std::string_view::npos;
  }

  std::size_t find_ci(std::string_view needle, std::size_t from) const {
    for (std::size_t j = from; j + needle.size() <= src_.size(); ++j) {
      if (text::starts_with_ci(src_.substr(j), needle)) return j;
    }
    return std::string_view::npos;
  }

  std::size_t step(std::size_t i) {
    const char c = src_[i];
    if (top_level_ && at_line_start(i)) {
      if (starts_at(src_, i, "==")) {
        stopped_ = true;
        return src_.size();
      }
      if (starts_at(src_, i, "{|")) return skip_region(i, "{|", "|}");
      if (starts_at(src_, i, "----")) {
        std::size_t j = i;
        while (j < src_.size() && src_[j] == '-') ++j;
        return j;
      }
      if (c == '*' || c == '#' || c == ':' || c == ';') {
        std::size_t j = i;
        while (j < src_.size() && (src_[j] == '*' || src_[j] == '#' || src_[j] == ':' || src_[j] == ';')) ++j;
        return j;
      }
    }
    if (starts_at(src_, i, "<!--")) {
      const std::size_t end = src_.find("-->", i + 4);
      if (end == std::string_view::npos) {
        stop_unbalanced();
        return src_.size();
      }
      return end + 3;
    }
    if (starts_at(src_, i, "{{")) return skip_region(i, "{{", "}}");
    if (starts_at(src_, i, "[[")) return link(i);
    if (c == '[') return external_link(i);
    if (c == '<') return tag(i);
    if (c == '\'' && starts_at(src_, i, "''")) {
      std::size_t j = i;
      while (j < src_.size() && src_[j] == '\'') ++j;
      return j;
    }
    if (starts_at(src_, i, "__")) {
      std::size_t j = i + 2;
      while (j < src_.size() && src_[j] >= 'A' && src_[j] <= 'Z') ++j;
      if (j > i + 2 && starts_at(src_, j, "__")) return j + 2;
    }
    if (c == '&') return entity(i);
    out_.put(c);
    return i + 1;
  }

  std::size_t skip_region(std::size_t i, std::string_view open, std::string_view close) {
    const std::size_t end = skip_balanced(i, open, close);
    if (end == std::string_view::npos) {
      stop_unbalanced();
      return src_.size();
    }
    return end;
  }

  std::size_t entity(std::size_t i) {
    const std::size_t semi = src_.find(';', i);
    if (semi != std::string_view::npos && semi - i <= 10) {
      std::string_view name = src_.substr(i + 1, semi - i - 1);
      if (!name.empty() && name[0] == '#') {
        std::uint32_t cp = 0;
        std::string_view digits = name.substr(1);
        int base = 10;
        if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
          base = 16;
          digits.remove_prefix(1);
        }
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, base);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() &&
            cp > 0 && cp < 0x110000 && (cp < 0xD800 || cp > 0xDFFF)) {
          std::string enc;
          text::append_utf8(enc, cp == 0xA0 ? U' ' : static_cast<char32_t>(cp));
          out_.put(enc);
          return semi + 1;
        }
      } else {
        for (const Entity& e : kEntities) {
          if (e.name == name) {
            out_.put(e.utf8);
            return semi + 1;
          }
        }
      }
    }
    out_.put('&');
    return i + 1;
  }

  std::size_t tag(std::size_t i) {
    std::size_t j = i + 1;
    const bool closing = j < src_.size() && src_[j] == '/';
    if (closing) ++j;
    std::size_t name_end = j;
    while (name_end < src_.size() && (is_ascii_alpha(src_[name_end]) || (name_end > j && src_[name_end] >= '0' && src_[name_end] <= '9'))) ++name_end;
    if (name_end == j) {
      out_.put('<');
      return i + 1;
    }
    const std::string name = text::to_lower_ascii(src_.substr(j, name_end - j));
    const std::size_t gt = src_.find('>', name_end);
    if (gt == std::string_view::npos) {
      out_.put('<');
      return i + 1;
    }
    const bool self_closing = src_[gt - 1] == '/';
    if (!closing && !self_closing) {
      for (std::string_view content_tag : kContentTags) {
        if (name == content_tag) {
          const std::size_t close = find_ci("</" + name, gt + 1);
          if (close == std::string_view::npos) {
            stop_unbalanced();
            return src_.size();
          }
          const std::size_t close_gt = src_.find('>', close);
          return close_gt == std::string_view::npos ? src_.size() : close_gt + 1;
        }
      }
      if (name == "nowiki") {
        const std::size_t close = find_ci("</nowiki>", gt + 1);
        const std::size_t stop = close == std::string_view::npos ? src_.size() : close;
        out_.put(src_.substr(gt + 1, stop - gt - 1));
        return close == std::string_view::npos ? src_.size() : close + 9;
      }
    }
    if (name == "br") out_.put(' ');
    return gt + 1;
  }

  std::size_t external_link(std::size_t i) {
    const std::string_view rest = src_.substr(i + 1);
    const bool url = text::starts_with_ci(rest, "http://") || text::starts_with_ci(rest, "https://") ||
                     starts_at(rest, 0, "//");
    if (!url) {
      out_.put('[');
      return i + 1;
    }
    const std::size_t close = src_.find(']', i);
    const std::size_t newline = src_.find('\n', i);
    if (close == std::string_view::npos || (newline != std::string_view::npos && newline < close)) {
      out_.put('[');
      return i + 1;
    }
    const std::string_view inner = src_.substr(i + 1, close - i - 1);
    const std::size_t space = inner.find(' ');
    if (space != std::string_view::npos) {
      out_.put(render_inline(inner.substr(space + 1)));
    }
    return close + 1;
  }

  std::size_t link(std::size_t i) {
    const std::size_t end = skip_balanced(i, "[[", "]]");
    if (end == std::string_view::npos) {
      stop_unbalanced();
      return src_.size();
    }
    const std::string_view inner = src_.substr(i + 2, end - i - 4);
    // Split target|surface at the first pipe outside nested brackets.
    std::size_t pipe = std::string_view::npos;
    int depth = 0;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      if (starts_at(inner, k, "[[") || starts_at(inner, k, "{{")) {
        ++depth;
        ++k;
      } else if (starts_at(inner, k, "]]") || starts_at(inner, k, "}}")) {
        --depth;
        ++k;
      } else if (inner[k] == '|' && depth == 0) {
        pipe = k;
        break;
      }
    }
    std::string_view target = text::trim(inner.substr(0, pipe));
    const bool leading_colon = !target.empty() && target[0] == ':';
    if (!leading_colon) {
      for (std::string_view ns : kDroppedNamespaces) {
        if (text::starts_with_ci(target, ns)) return end;
      }
    } else {
      target.remove_prefix(1);
    }

    std::string surface;
    if (pipe == std::string_view::npos) {
      surface = render_inline(target);
    } else {
      surface = render_inline(inner.substr(pipe + 1));
      if (surface.empty()) surface = pipe_trick(target);
    }
    // English link trail: "[[dog]]s" renders as one link "dogs".
    std::size_t after = end;
    while (after < src_.size() && is_ascii_lower(src_[after])) ++after;
    surface.append(src_.substr(end, after - end));

    const std::string normalized = text::normalize_title(target);
    if (surface.empty()) return after;
    if (normalized.empty() || !top_level_) {
      out_.put(surface);
      return after;
    }
    ByteAnchor a;
    a.surface = surface;
    a.target = normalized;
    a.begin = out_.size();
    out_.put(surface);
    a.end = out_.size();
    anchors_.push_back(std::move(a));
    return after;
  }

  static std::string pipe_trick(std::string_view target) {
    std::string t(target);
    const std::size_t colon = t.find(':');
    if (colon != std::string::npos) t = t.substr(colon + 1);
    const std::size_t paren = t.find(" (");
    if (paren != std::string::npos && !t.empty() && t.back() == ')') t = t.substr(0, paren);
    return text::normalize_space(t);
  }

  static std::string render_inline(std::string_view s) {
    LeadExtractor inner(s, false);
    inner.run();
    return text::normalize_space(inner.builder().finish());
  }

  std::string_view src_;
  bool top_level_;
  TextBuilder out_;
  std::vector<ByteAnchor> anchors_;
  bool stopped_ = false;
  bool unbalanced_ = false;
};

}  // namespace

Paragraph extract_leading_paragraph(std::string_view wikitext) {
  LeadExtractor ex(wikitext, true);
  ex.run();
  Paragraph p;
  p.text = ex.builder().finish();
  p.quality = ex.unbalanced() ? Quality::kUnbalancedMarkup : Quality::kClean;

  // Byte offsets -> scalar offsets.
  std::vector<std::size_t> scalar_at(p.text.size() + 1, 0);
  std::size_t count = 0;
  for (std::size_t b = 0; b < p.text.size(); ++b) {
    scalar_at[b] = count;
    if ((static_cast<unsigned char>(p.text[b]) & 0xC0) != 0x80) ++count;
  }
  scalar_at[p.text.size()] = count;
  for (ByteAnchor& a : ex.anchors()) {
    if (a.end > p.text.size() || a.begin >= a.end) continue;
    AnchorSpan span;
    span.surface = std::move(a.surface);
    span.target_title = std::move(a.target);
    span.char_start = scalar_at[a.begin];
    span.char_end = scalar_at[a.end];
    p.anchors.push_back(std::move(span));
  }
  return p;
}

Paragraph resolve_anchor_targets(Paragraph paragraph,
                                 const std::map<std::string, std::string>& title_index) {
  std::vector<AnchorSpan> kept;
  kept.reserve(paragraph.anchors.size());
  for (AnchorSpan& a : paragraph.anchors) {
    auto it = title_index.find(text::normalize_title(a.target_title));
    if (it == title_index.end()) {
      ++paragraph.unresolved_anchors;
      continue;
    }
    a.qid = it->second;
    kept.push_back(std::move(a));
  }
  paragraph.anchors = std::move(kept);
  return paragraph;
}

nlohmann::json to_json(const Paragraph& p) {
  nlohmann::json anchors = nlohmann::json::array();
  for (const AnchorSpan& a : p.anchors) {
    nlohmann::json j;
    j["surface"] = a.surface;
    j["target"] = a.target_title;
    j["start"] = a.char_start;
    j["end"] = a.char_end;
    if (a.qid) j["qid"] = *a.qid;
    anchors.push_back(std::move(j));
  }
  nlohmann::json j;
  j["doc_id"] = p.doc_id;
  j["source_title"] = p.source_title;
  j["text"] = p.text;
  j["anchors"] = std::move(anchors);
  j["quality"] = p.quality == Quality::kClean ? "clean" : "unbalanced_markup";
  j["unresolved_anchors"] = p.unresolved_anchors;
  return j;
}

Paragraph paragraph_from_json(const nlohmann::json& j) {
  Paragraph p;
  p.doc_id = j.at("doc_id").get<std::string>();
  p.source_title = j.value("source_title", "");
  p.text = j.at("text").get<std::string>();
  for (const nlohmann::json& a : j.value("anchors", nlohmann::json::array())) {
    AnchorSpan s;
    s.surface = a.at("surface").get<std::string>();
    s.target_title = a.at("target").get<std::string>();
    s.char_start = a.at("start").get<std::size_t>();
    s.char_end = a.at("end").get<std::size_t>();
    if (a.contains("qid") && a["qid"].is_string()) s.qid = a["qid"].get<std::string>();
    p.anchors.push_back(std::move(s));
  }
  p.quality = j.value("quality", "clean") == "clean" ? Quality::kClean : Quality::kUnbalancedMarkup;
  p.unresolved_anchors = j.value("unresolved_anchors", std::size_t{0});
  return p;
}

void write_paragraphs_header(std::ostream& out) {
  nlohmann::json h = io::jsonl_header("forge-paragraphs");
  h["offset_unit"] = kOffsetUnit;
  out << h.dump() << '\n';
}

}  // namespace forge::wikipedia
