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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crag/scoring.hpp"

namespace crag {

/// A small ordered unit of knowledge: a window of sentences from a retrieved
/// document, or one paragraph of a fetched web page.
struct KnowledgeStrip {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;
    std::optional<RelevanceScore> score;

    bool operator==(const KnowledgeStrip&) const = default;
};

struct RefineConfig {
    int strip_sentences = 3;
    int top_k = 5;
    double strip_threshold = -0.5;

    void validate() const;
};

enum class KnowledgeKind { Internal, External, Combined };

std::string_view to_string(KnowledgeKind k);

inline constexpr std::string_view kStripSeparator = "\n";

struct KnowledgeBundle {
    KnowledgeKind kind = KnowledgeKind::Internal;
    std::string text;
    std::vector<KnowledgeStrip> strips;

    /// Bundle whose text is the strip texts joined by kStripSeparator.
    static KnowledgeBundle from_strips(KnowledgeKind kind, std::vector<KnowledgeStrip> strips);
    /// Internal text, separator, external text; either side may be empty.
    static KnowledgeBundle combine(const KnowledgeBundle& internal, const KnowledgeBundle& external);
};

/// Splits on '.', '!' or '?' followed by whitespace or end of text. Each
/// sentence is returned with its whitespace collapsed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Documents of one or two sentences become a single strip; longer ones are
/// cut into consecutive windows of `cfg.strip_sentences` sentences.
/// Throws InvalidArgument for whitespace-only text.
std::vector<KnowledgeStrip> segment(const DocumentText& doc, const RefineConfig& cfg);

/// Positions (into `scores`) chosen by the selection rule: keep scores above
/// the threshold, take the top_k by score (earlier position wins ties), then
/// return in position order. If nothing passes, the single best position.
std::vector<std::size_t> select_positions(std::span<const RelevanceScore> scores, const RefineConfig& cfg);

/// Scores `strips` (given in position order) and applies select_positions.
/// Returned strips carry their score.
std::vector<KnowledgeStrip> filter_strips(const QueryText& query, std::span<const KnowledgeStrip> strips,
                                          const Scorer& scorer, const RefineConfig& cfg);

/// Decompose every document, pool the strips in (document, strip) order,
/// filter, and recompose into internal knowledge.
KnowledgeBundle refine(const QueryText& query, std::span<const DocumentText> docs, const Scorer& scorer,
                       const RefineConfig& cfg);

/// Raw documents as internal knowledge, one strip per document, unscored.
KnowledgeBundle raw_documents(std::span<const DocumentText> docs);

}  // namespace crag
