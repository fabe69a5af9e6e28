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

#ifndef FORGE_TEXT_HPP_
#define FORGE_TEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace forge::text {

// Number of unicode scalar values in a UTF-8 string. Invalid lead bytes
// count as one scalar each.
std::size_t scalar_length(std::string_view utf8);

// Byte offset of the scalar at `scalar_index`; returns utf8.size() when the
// index equals the scalar length.
std::size_t byte_offset_of_scalar(std::string_view utf8, std::size_t scalar_index);

// Slice by scalar offsets [begin, end).
std::string_view scalar_slice(std::string_view utf8, std::size_t begin, std::size_t end);

// Appends the UTF-8 encoding of a code point.
void append_utf8(std::string& out, char32_t cp);

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Collapses whitespace runs to a single space and trims.
std::string normalize_space(std::string_view s);

// Lowercase + whitespace normalisation used for type/alias comparisons.
std::string fold(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// "a", "a and b", "a, b and c".
std::string join_with_and(const std::vector<std::string>& items);

// Page-title normalisation: underscores become spaces, whitespace is
// collapsed, a "#fragment" is dropped and the first character is upper-cased
// (ASCII only).
std::string normalize_title(std::string_view title);

// Numeric part of an identifier such as "Q64" or "P31"; nullopt-like 0 when
// the identifier is malformed.
std::uint64_t id_number(std::string_view id);
bool is_qid(std::string_view id);
bool is_pid(std::string_view id);

// Orders "Q2" before "Q10".
struct IdLess {
  bool operator()(std::string_view a, std::string_view b) const;
  using is_transparent = void;
};

}  // namespace forge::text

#endif  // FORGE_TEXT_HPP_
