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

#include "crag/refinement.hpp"

#include <algorithm>
#include <numeric>

#include "crag/error.hpp"
#include "crag/text.hpp"

namespace crag {

void RefineConfig::validate() const {
    if (strip_sentences < 1) throw ConfigError("refine.strip_sentences must be at least 1");
    if (top_k < 1) throw ConfigError("refine.top_k must be at least 1");
    if (!(strip_threshold >= -1.0 && strip_threshold <= 1.0))
        throw ConfigError("refine.strip_threshold must lie in [-1, 1]");
}

std::string_view to_string(KnowledgeKind k) {
    switch (k) {
        case KnowledgeKind::Internal: return "Internal";
        case KnowledgeKind::External: return "External";
        case KnowledgeKind::Combined: return "Combined";
    }
    return "Internal";
}

KnowledgeBundle KnowledgeBundle::from_strips(KnowledgeKind kind, std::vector<KnowledgeStrip> strips) {
    KnowledgeBundle b{kind, {}, std::move(strips)};
    for (std::size_t i = 0; i < b.strips.size(); ++i) {
        if (i) b.text += kStripSeparator;
        b.text += b.strips[i].text;
    }
    return b;
}

KnowledgeBundle KnowledgeBundle::combine(const KnowledgeBundle& internal, const KnowledgeBundle& external) {
    KnowledgeBundle b{KnowledgeKind::Combined, internal.text, internal.strips};
    if (!b.text.empty() && !external.text.empty()) b.text += kStripSeparator;
    b.text += external.text;
    b.strips.insert(b.strips.end(), external.strips.begin(), external.strips.end());
    return b;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == s.size() || is_space(s[i + 1]))) {
            auto sentence = text::collapse_whitespace(s.substr(start, i + 1 - start));
            if (!sentence.empty()) out.push_back(std::move(sentence));
            start = i + 1;
        }
    }
    if (start < s.size()) {
        auto tail = text::collapse_whitespace(s.substr(start));
        if (!tail.empty()) out.push_back(std::move(tail));
    }
    return out;
}

std::vector<KnowledgeStrip> segment(const DocumentText& doc, const RefineConfig& cfg) {
    if (text::is_blank(doc.text)) throw InvalidArgument("document '" + doc.id + "' has no text");
    const auto sentences = split_sentences(doc.text);
    const std::size_t window = sentences.size() <= 2 ? sentences.size() : static_cast<std::size_t>(cfg.strip_sentences);

    std::vector<KnowledgeStrip> strips;
    for (std::size_t begin = 0; begin < sentences.size(); begin += window) {
        const std::size_t end = std::min(begin + window, sentences.size());
        std::string joined = sentences[begin];
        for (std::size_t i = begin + 1; i < end; ++i) joined += ' ' + sentences[i];
        strips.push_back(KnowledgeStrip{doc.id, strips.size(), std::move(joined), std::nullopt});
    }
    return strips;
}

std::vector<std::size_t> select_positions(std::span<const RelevanceScore> scores, const RefineConfig& cfg) {
    if (scores.empty()) return {};
    std::vector<std::size_t> passing;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].value() > cfg.strip_threshold) passing.push_back(i);
    }
    if (passing.empty()) {
        // max_element returns the first maximum, i.e. the earliest position.
        auto best = std::max_element(scores.begin(), scores.end());
        return {static_cast<std::size_t>(best - scores.begin())};
    }
    std::stable_sort(passing.begin(), passing.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    if (passing.size() > static_cast<std::size_t>(cfg.top_k)) passing.resize(static_cast<std::size_t>(cfg.top_k));
    std::sort(passing.begin(), passing.end());
    return passing;
}

std::vector<KnowledgeStrip> filter_strips(const QueryText& query, std::span<const KnowledgeStrip> strips,
                                          const Scorer& scorer, const RefineConfig& cfg) {
    if (strips.empty()) throw InvalidArgument("no knowledge strips to filter");
    std::vector<std::string> texts;
    texts.reserve(strips.size());
    for (const auto& s : strips) texts.push_back(s.text);
    const auto scores = scorer.score_texts(query, texts);

    std::vector<KnowledgeStrip> out;
    for (std::size_t pos : select_positions(scores, cfg)) {
        KnowledgeStrip s = strips[pos];
        s.score = scores[pos];
        out.push_back(std::move(s));
    }
    return out;
}

KnowledgeBundle refine(const QueryText& query, std::span<const DocumentText> docs, const Scorer& scorer,
                       const RefineConfig& cfg) {
    if (docs.empty()) throw InvalidArgument("no documents to refine");
    std::vector<KnowledgeStrip> pooled;
    for (const auto& d : docs) {
        if (text::is_blank(d.text)) continue;
        auto strips = segment(d, cfg);
        pooled.insert(pooled.end(), std::make_move_iterator(strips.begin()), std::make_move_iterator(strips.end()));
    }
    if (pooled.empty()) throw InvalidArgument("every document is blank");
    return KnowledgeBundle::from_strips(KnowledgeKind::Internal, filter_strips(query, pooled, scorer, cfg));
}

KnowledgeBundle raw_documents(std::span<const DocumentText> docs) {
    std::vector<KnowledgeStrip> strips;
    for (const auto& d : docs) {
        if (text::is_blank(d.text)) continue;
        strips.push_back(KnowledgeStrip{d.id, 0, text::collapse_whitespace(d.text), std::nullopt});
    }
    return KnowledgeBundle::from_strips(KnowledgeKind::Internal, std::move(strips));
}

}  // namespace crag
