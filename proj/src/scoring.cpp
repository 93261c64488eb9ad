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

#include "crag/scoring.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "crag/error.hpp"
#include "crag/parallel.hpp"
#include "crag/text.hpp"

namespace crag {

using nlohmann::json;

QueryText::QueryText(std::string_view raw) : text_(text::trim(raw)) {
    if (text_.empty()) throw InvalidArgument("query text is empty");
}

RelevanceScore::RelevanceScore(double v) : value_(v) {
    if (std::isnan(v) || v < kMin || v > kMax)
        throw InvalidArgument("relevance score " + std::to_string(v) + " outside [-1, 1]");
}

RelevanceScore RelevanceScore::clamped(double v) noexcept {
    if (std::isnan(v)) return {kMin, Unchecked{}};
    return {std::clamp(v, kMin, kMax), Unchecked{}};
}

namespace {

constexpr std::string_view kDirectPrompt =
    "Given a question, does the following document have exact information to answer the question? "
    "Answer yes or no only.\n"
    "Question: [question]\n"
    "Document: [document]";

constexpr std::string_view kChainOfThoughtPrompt =
    "Given a question, does the following document have exact information to answer the question?\n"
    "Question: [question]\n"
    "Document: [document]\n"
    "Think Step by step, and answer with yes or no only.";

constexpr std::string_view kFewShotPrompt =
    "Given a question, does the following document have exact information to answer the question? "
    "Answer yes or no only.\n"
    "\n"
    "Question: In what city was Abraham Raimbach born?\n"
    "Document: Bancroft was born on November 25, 1839 in New Ipswich, New Hampshire to James Bancroft and "
    "Sarah Kimball. At an early age he was cared for by Mr. and Mrs. Patch of Ashby, Massachusetts, the "
    "neighboring town. While not legally adopted, they named him Cecil Franklin Patch Bancroft, adding "
    "Franklin Patch after the son Mr. and Mrs. Patch had who recently died. He attended public schools in "
    "Ashby as well as the Appleton Academy in New Ipswich. He entered Dartmouth College in 1856 at the age "
    "of sixteen and graduated in 1860 near the top of his class. Bancroft continued his education as he "
    "began his career in teaching. He took classes at the Union Theological Seminary in New York City "
    "during the 1864-65 academic year. While there he was a member of the United States Christian "
    "Commission, traveling to support soldiers during the Civil War. He then transferred to the Andover "
    "Theological Seminary where he would graduate in 1867.\n"
    "Answer: No.\n"
    "\n"
    "Question: In what country is Wilcza Jama, Sok\xC3\xB3\xC5\x82ka County?\n"
    "Document: Wilcza Jama is a village in the administrative district of Gmina Sok\xC3\xB3\xC5\x82ka, within "
    "Sok\xC3\xB3\xC5\x82ka County, Podlaskie Voivodeship, in north-eastern Poland, close to the border with "
    "Belarus.\n"
    "Answer: Yes.\n"
    "\n"
    "Question: What sport does 2004 Legg Mason Tennis Classic play?\n"
    "Document: The 2004 Legg Mason Tenis Classic was the 36th edition of this tennis tournament and was "
    "played on outdoor hard courts. The tournament was part of the International Series of the 2004 ATP "
    "Tour. It was held at the William H.G. FitzGerald Tennis Center in Washington, D.C. from August 16 "
    "through August 22, 2004.\n"
    "Answer: Yes.\n"
    "\n"
    "Question: Who is the author of Skin?\n"
    "Document: The Skin We're In: A Year of Black Resistance and Power is a book by Desmond Cole published "
    "by Doubleday Canada in 2020. The Skin We're In describes the struggle against racism in Canada during "
    "the year 2017, chronicling Cole's role as an anti-racist activist and the impact of systemic racism in "
    "Canadian society. Among the events it discusses are the aftermath of the assault of Dafonte Miller in "
    "late 2016 and Canada 150. The work argues that Canada is not immune to the anti-Black racism that "
    "characterizes American society. Due to an error by the publisher, the initial printing of the book's "
    "cover did not include word \"Black\" in the subtitle. The mistake was later corrected. The book won "
    "the Toronto Book Award for 2020. In 2021, the book was nominated for the Shaughnessy Cohen Prize for "
    "Political Writing.\n"
    "Answer: No.\n"
    "\n"
    "Question: [question]\n"
    "Document: [document]\n"
    "Answer:";

}  // namespace

std::string_view evaluator_prompt_template(EvaluatorPrompt p) {
    switch (p) {
        case EvaluatorPrompt::Direct: return kDirectPrompt;
        case EvaluatorPrompt::ChainOfThought: return kChainOfThoughtPrompt;
        case EvaluatorPrompt::FewShot: return kFewShotPrompt;
    }
    return kDirectPrompt;
}

std::string render_evaluator_prompt(EvaluatorPrompt p, std::string_view question, std::string_view document) {
    // Single pass: text substituted for one marker is never rescanned.
    std::string tmpl(evaluator_prompt_template(p));
    const std::string marker_q = "[question]";
    const std::string marker_d = "[document]";
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto q = tmpl.find(marker_q, pos);
        auto d = tmpl.find(marker_d, pos);
        auto next = std::min(q, d);
        if (next == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, next - pos);
        if (next == q) {
            out.append(question);
            pos = next + marker_q.size();
        } else {
            out.append(document);
            pos = next + marker_d.size();
        }
    }
    return out;
}

std::optional<EvaluatorPrompt> parse_evaluator_prompt(std::string_view name) {
    if (name == "direct") return EvaluatorPrompt::Direct;
    if (name == "cot" || name == "chain_of_thought") return EvaluatorPrompt::ChainOfThought;
    if (name == "few_shot" || name == "fewshot") return EvaluatorPrompt::FewShot;
    return std::nullopt;
}

void ScorerConfig::validate() const {
    if (kind == Kind::Remote && !endpoint) throw ConfigError("scorer.endpoint is required when scorer.kind = remote");
    if (kind == Kind::Lexical && endpoint) throw ConfigError("scorer.endpoint is only valid when scorer.kind = remote");
    if (endpoint && !http::is_absolute_url(*endpoint)) throw ConfigError("scorer.endpoint is not an absolute URL");
    if (retries < 0) throw ConfigError("scorer.retries must be non-negative");
    if (max_in_flight < 1) throw ConfigError("scorer.max_in_flight must be at least 1");
    if (timeout.count() <= 0) throw ConfigError("scorer.timeout_ms must be positive");
}

std::vector<RelevanceScore> Scorer::score_texts(const QueryText& query, std::span<const std::string> texts) const {
    std::vector<RelevanceScore> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(score_text(query, t));
    return out;
}

std::vector<RelevanceScore> Scorer::score_batch(const QueryText& query, std::span<const DocumentText> docs) const {
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) texts.push_back(d.text);
    return score_texts(query, texts);
}

RelevanceScore LexicalScorer::score_text(const QueryText& query, std::string_view doc) const {
    const auto q = text::unique_tokens(query.str());
    if (q.empty()) return RelevanceScore(-1.0);
    const auto hits = text::token_overlap(query.str(), doc);
    return RelevanceScore::clamped(2.0 * static_cast<double>(hits) / static_cast<double>(q.size()) - 1.0);
}

RemoteScorer::RemoteScorer(ScorerConfig cfg, std::shared_ptr<http::Transport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), in_flight_(cfg_.max_in_flight) {
    cfg_.validate();
    if (cfg_.kind != ScorerConfig::Kind::Remote) throw ConfigError("RemoteScorer requires scorer.kind = remote");
}

RelevanceScore RemoteScorer::request(const QueryText& query, std::string_view doc) const {
    json body{{"query", query.str()}, {"document", doc}};
    if (cfg_.prompt) body["prompt"] = render_evaluator_prompt(*cfg_.prompt, query.str(), doc);

    std::string reply;
    in_flight_.acquire();
    try {
        reply = http::post_json(*transport_, *cfg_.endpoint, body.dump(), cfg_.timeout, cfg_.retries);
    } catch (const Error& e) {
        in_flight_.release();
        throw ScorerUnavailable(std::string("scorer unavailable: ") + e.what());
    }
    in_flight_.release();

    json parsed = json::parse(reply, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("score") || !parsed["score"].is_number())
        throw ScorerUnavailable("scorer returned a non-numeric score: " + reply.substr(0, 200));
    return RelevanceScore::clamped(parsed["score"].get<double>());
}

RelevanceScore RemoteScorer::score_text(const QueryText& query, std::string_view doc) const {
    return request(query, doc);
}

std::vector<RelevanceScore> RemoteScorer::score_texts(const QueryText& query, std::span<const std::string> texts) const {
    std::vector<std::optional<RelevanceScore>> slots(texts.size());
    parallel_for(texts.size(), static_cast<std::size_t>(cfg_.max_in_flight),
                 [&](std::size_t i) { slots[i] = request(query, texts[i]); });
    std::vector<RelevanceScore> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(*s);
    return out;
}

std::unique_ptr<Scorer> make_scorer(const ScorerConfig& cfg, std::shared_ptr<http::Transport> transport) {
    cfg.validate();
    if (cfg.kind == ScorerConfig::Kind::Lexical) return std::make_unique<LexicalScorer>();
    return std::make_unique<RemoteScorer>(cfg, std::move(transport));
}

}  // namespace crag
