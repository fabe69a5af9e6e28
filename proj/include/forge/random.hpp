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

#ifndef FORGE_RANDOM_HPP_
#define FORGE_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace forge {

// std::mt19937_64 is specified bit-for-bit by the standard; the
// distributions are not. Everything that feeds output goes through the
// helpers below so samples are identical across standard libraries.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

// Independent stream for one document: depends only on (seed, key).
Rng derive_rng(std::uint64_t seed, std::string_view key);

// Uniform in [0, n). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Uniform in [lo, hi].
std::uint64_t uniform_between(Rng& rng, std::uint64_t lo, std::uint64_t hi);

// `count` distinct indices from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count);

}  // namespace forge

#endif  // FORGE_RANDOM_HPP_
