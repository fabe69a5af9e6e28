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

#ifndef FORGE_ERROR_HPP_
#define FORGE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace forge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable dump or other unrecoverable ingest condition.
class IngestError : public Error {
 public:
  using Error::Error;
};

// A qid/pid that the caller promised is present was not found.
class LookupError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class InstantiationError : public Error {
 public:
  using Error::Error;
};

class AugmentError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage could not run (missing dependency artifact, bad config).
class StageError : public Error {
 public:
  using Error::Error;
};

}  // namespace forge

#endif  // FORGE_ERROR_HPP_
