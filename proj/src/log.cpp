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

#include "forge/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace forge::log {
namespace {

std::mutex g_mu;
std::atomic<Level> g_min_level{Level::kWarning};

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarning: return "warning";
    case Level::kError: return "error";
  }
  return "?";
}

Sink& sink() {
  static Sink s = [](Level level, std::string_view message) {
    std::clog << "[forge " << level_name(level) << "] " << message << '\n';
  };
  return s;
}

}  // namespace

Sink set_sink(Sink s) {
  std::lock_guard<std::mutex> lock(g_mu);
  Sink previous = std::move(sink());
  sink() = std::move(s);
  return previous;
}

void set_min_level(Level level) { g_min_level = level; }

void write(Level level, std::string_view message) {
  if (level < g_min_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mu);
  if (sink()) sink()(level, message);
}

}  // namespace forge::log
