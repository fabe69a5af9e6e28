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

#ifndef FORGE_DATE_HPP_
#define FORGE_DATE_HPP_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace forge {

using Date = std::chrono::year_month_day;

// Accepts "YYYY-MM-DD" and "MM/DD/YYYY".
std::optional<Date> parse_date(std::string_view s);
std::string format_date(const Date& d);

// "2022-06-20T12:34:56Z" -> seconds since epoch.
std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view s);
std::string format_timestamp(std::chrono::sys_seconds t);

}  // namespace forge

#endif  // FORGE_DATE_HPP_
