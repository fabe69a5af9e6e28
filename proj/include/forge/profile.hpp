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

#ifndef FORGE_PROFILE_HPP_
#define FORGE_PROFILE_HPP_

#include <optional>
#include <string>
#include <vector>

namespace forge {

// What the knowledge base says about one entity: canonical title, base
// types, description and aliases. `types[i]` is the label of `type_qids[i]`.
struct EntityProfile {
  std::string qid;
  std::string title;
  std::vector<std::string> types;
  std::vector<std::string> type_qids;
  std::optional<std::string> description;
  std::vector<std::string> aliases;

  bool operator==(const EntityProfile&) const = default;
};

}  // namespace forge

#endif  // FORGE_PROFILE_HPP_
