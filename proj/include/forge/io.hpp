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

#ifndef FORGE_IO_HPP_
#define FORGE_IO_HPP_

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"

namespace forge::io {

// Opens a file for reading. gzip-compressed input is decompressed on the fly;
// plain files pass through unchanged. Throws IngestError when the file cannot
// be opened.
std::unique_ptr<std::istream> open_input(const std::filesystem::path& path);

// Writes to `<path>.tmp` and renames into place on commit(). If the object is
// destroyed without commit() the temporary file is removed.
class AtomicWriter {
 public:
  explicit AtomicWriter(std::filesystem::path path);
  ~AtomicWriter();
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

// Header line written at the top of every JSONL artifact.
nlohmann::json jsonl_header(std::string_view format, int version = 1);

// Calls `fn` for each JSON object line. A first line carrying a "format" key
// is treated as the header and passed to `on_header` instead (if given).
// Blank lines are skipped. Malformed lines throw Error naming the line.
void for_each_jsonl(std::istream& in,
                    const std::function<void(const nlohmann::json&)>& fn,
                    const std::function<void(const nlohmann::json&)>& on_header = {});

}  // namespace forge::io

#endif  // FORGE_IO_HPP_
