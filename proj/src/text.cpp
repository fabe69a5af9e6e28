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

#include "forge/text.hpp"

#include <algorithm>
#include <cctype>

namespace forge::text {
namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::size_t scalar_length(std::string_view utf8) {
  std::size_t n = 0;
  for (unsigned char c : utf8) {
    if (!is_continuation(c)) ++n;
  }
  return n;
}

std::size_t byte_offset_of_scalar(std::string_view utf8, std::size_t scalar_index) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < utf8.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(utf8[i]))) continue;
    if (seen == scalar_index) return i;
    ++seen;
  }
  return utf8.size();
}

std::string_view scalar_slice(std::string_view utf8, std::size_t begin, std::size_t end) {
  if (end < begin) end = begin;
  const std::size_t b = byte_offset_of_scalar(utf8, begin);
  const std::size_t e = byte_offset_of_scalar(utf8, end);
  return utf8.substr(b, e - b);
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

std::string normalize_space(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string fold(std::string_view s) { return to_lower_ascii(normalize_space(s)); }

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string join_with_and(const std::vector<std::string>& items) {
  if (items.empty()) return {};
  if (items.size() == 1) return items.front();
  std::string out;
  for (std::size_t i = 0; i + 1 < items.size(); ++i) {
    if (i > 0) out.append(", ");
    out.append(items[i]);
  }
  out.append(" and ");
  out.append(items.back());
  return out;
}

std::string normalize_title(std::string_view title) {
  const std::size_t hash = title.find('#');
  if (hash != std::string_view::npos) title = title.substr(0, hash);
  std::string spaced(title);
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  std::string out = normalize_space(spaced);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::uint64_t id_number(std::string_view id) {
  if (id.size() < 2) return 0;
  std::uint64_t n = 0;
  for (char c : id.substr(1)) {
    if (c < '0' || c > '9') return 0;
    n = n * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return n;
}

namespace {
bool is_prefixed_id(std::string_view id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return false;
  return std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; });
}
}  // namespace

bool is_qid(std::string_view id) { return is_prefixed_id(id, 'Q'); }
bool is_pid(std::string_view id) { return is_prefixed_id(id, 'P'); }

bool IdLess::operator()(std::string_view a, std::string_view b) const {
  if (!a.empty() && !b.empty() && a[0] == b[0]) {
    const std::uint64_t na = id_number(a);
    const std::uint64_t nb = id_number(b);
    if (na != nb && na != 0 && nb != 0) return na < nb;
  }
  return a < b;
}

}  // namespace forge::text
