/*
 * Copyright 2026 The CRAG Harness Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace crag::text {

/// Lowercases ASCII letters and splits on runs of non-alphanumeric bytes.
/// Bytes >= 0x80 are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view s);

/// Sorted, deduplicated tokens.
std::vector<std::string> unique_tokens(std::string_view s);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Trims and replaces every whitespace run with a single space.
std::string collapse_whitespace(std::string_view s);

bool is_blank(std::string_view s);

/// Case-insensitive (ASCII) substring test.
bool icontains(std::string_view haystack, std::string_view needle);

/// Number of distinct query tokens that also occur in `candidate`.
std::size_t token_overlap(std::string_view query, std::string_view candidate);

std::vector<std::string> split_lines(std::string_view s);

std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace crag::text
