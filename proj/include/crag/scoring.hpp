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

#include <chrono>
#include <compare>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crag/http.hpp"

namespace crag {

/// A trimmed, non-empty question.
class QueryText {
public:
    explicit QueryText(std::string_view raw);
    const std::string& str() const noexcept { return text_; }
    bool operator==(const QueryText&) const = default;

private:
    std::string text_;
};

struct DocumentText {
    std::string id;
    std::optional<std::string> title;
    std::string text;

    bool operator==(const DocumentText&) const = default;
};

/// Relevance of a text to a query, always inside [-1, 1].
class RelevanceScore {
public:
    static constexpr double kMin = -1.0;
    static constexpr double kMax = 1.0;

    /// Throws InvalidArgument when `v` is NaN or outside [-1, 1].
    explicit RelevanceScore(double v);
    /// Maps NaN to kMin and clips everything else into range.
    static RelevanceScore clamped(double v) noexcept;

    double value() const noexcept { return value_; }
    auto operator<=>(const RelevanceScore&) const = default;

private:
    struct Unchecked {};
    RelevanceScore(double v, Unchecked) noexcept : value_(v) {}
    double value_;
};

/// Prompt wording for an LLM-as-evaluator backend. The remote scorer forwards
/// the rendered prompt; mapping the model's yes/no to a score is the server's job.
enum class EvaluatorPrompt { Direct, ChainOfThought, FewShot };

std::string_view evaluator_prompt_template(EvaluatorPrompt p);
std::string render_evaluator_prompt(EvaluatorPrompt p, std::string_view question, std::string_view document);
std::optional<EvaluatorPrompt> parse_evaluator_prompt(std::string_view name);

struct ScorerConfig {
    enum class Kind { Lexical, Remote };

    Kind kind = Kind::Lexical;
    std::optional<std::string> endpoint;
    std::chrono::milliseconds timeout{10'000};
    int retries = 2;
    int max_in_flight = 8;
    std::optional<EvaluatorPrompt> prompt;

    /// Throws ConfigError unless endpoint is present exactly when kind is Remote.
    void validate() const;
};

/// Pluggable relevance evaluator. Implementations must be safe to call from
/// several threads at once.
class Scorer {
public:
    virtual ~Scorer() = default;

    virtual RelevanceScore score_text(const QueryText& query, std::string_view text) const = 0;

    /// Element i equals score_text(query, texts[i]).
    virtual std::vector<RelevanceScore> score_texts(const QueryText& query, std::span<const std::string> texts) const;

    RelevanceScore score(const QueryText& query, const DocumentText& doc) const { return score_text(query, doc.text); }
    std::vector<RelevanceScore> score_batch(const QueryText& query, std::span<const DocumentText> docs) const;
};

/// Token-overlap stand-in for a trained evaluator:
/// score = 2 * |query tokens found in text| / |unique query tokens| - 1.
class LexicalScorer final : public Scorer {
public:
    RelevanceScore score_text(const QueryText& query, std::string_view text) const override;
};

/// Scores over HTTP: POST {"query", "document"[, "prompt"]} -> {"score"}.
/// Out-of-range scores are clamped; missing or non-numeric scores and
/// transport failures raise ScorerUnavailable.
class RemoteScorer final : public Scorer {
public:
    RemoteScorer(ScorerConfig cfg, std::shared_ptr<http::Transport> transport);

    RelevanceScore score_text(const QueryText& query, std::string_view text) const override;
    std::vector<RelevanceScore> score_texts(const QueryText& query, std::span<const std::string> texts) const override;

private:
    RelevanceScore request(const QueryText& query, std::string_view text) const;

    ScorerConfig cfg_;
    std::shared_ptr<http::Transport> transport_;
    mutable std::counting_semaphore<> in_flight_;
};

std::unique_ptr<Scorer> make_scorer(const ScorerConfig& cfg, std::shared_ptr<http::Transport> transport);

}  // namespace crag
