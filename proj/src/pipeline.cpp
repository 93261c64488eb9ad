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

#include "crag/pipeline.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "crag/error.hpp"
#include "crag/text.hpp"

namespace crag {

using Clock = std::chrono::steady_clock;

namespace {

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void require_loopback(const std::optional<std::string>& endpoint, std::string_view key) {
    if (!endpoint) return;
    if (!http::is_loopback_host(http::parse_url(*endpoint).host))
        throw ConfigError(std::string(key) + " points outside loopback but offline mode is on: " + *endpoint);
}

void require_url(const std::optional<std::string>& endpoint, std::string_view key) {
    if (endpoint && !http::is_absolute_url(*endpoint))
        throw ConfigError(std::string(key) + " is not an absolute http(s) URL: " + *endpoint);
}

}  // namespace

void AblationFlags::validate() const {
    if (disable_action && only_action) throw ConfigError("disable_action and only_action are mutually exclusive");
}

Action effective_action(const ActionJudgment& j, const Thresholds& t, const AblationFlags& flags) {
    if (flags.only_action) return *flags.only_action;
    if (!flags.disable_action) return j.action;
    switch (*flags.disable_action) {
        case Action::Correct:
            return j.action == Action::Correct ? Action::Ambiguous : j.action;
        case Action::Incorrect:
            return j.action == Action::Incorrect ? Action::Ambiguous : j.action;
        case Action::Ambiguous:
            return j.max_score.value() > t.upper() ? Action::Correct : Action::Incorrect;
    }
    return j.action;
}

void PipelineConfig::validate() const {
    refine.validate();
    search.validate();
    scorer.validate();
    ablations.validate();
    require_url(generator.endpoint, "generator.endpoint");
    require_url(rewriter.endpoint, "rewriter.endpoint");
    if (generator.max_tokens < 1) throw ConfigError("generator.max_tokens must be positive");
    if (generator.retries < 0 || rewriter.retries < 0) throw ConfigError("retries must be non-negative");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (offline) {
        require_loopback(scorer.endpoint, "scorer.endpoint");
        require_loopback(search.endpoint, "search.endpoint");
        require_loopback(generator.endpoint, "generator.endpoint");
        require_loopback(rewriter.endpoint, "rewriter.endpoint");
    }
}

std::string assemble_prompt(const QueryText& question, const KnowledgeBundle& knowledge) {
    std::string out;
    if (!knowledge.text.empty()) {
        out += knowledge.text;
        out += "\n\n";
    }
    out += "Question: ";
    out += question.str();
    out += "\nAnswer:";
    return out;
}

std::string StubGenerator::generate(std::string_view prompt) const {
    static constexpr std::string_view kQuestionTag = "Question: ";
    static constexpr std::string_view kAnswerTag = "\nAnswer:";

    std::string_view knowledge;
    std::size_t q_start;
    if (prompt.starts_with(kQuestionTag)) {
        q_start = kQuestionTag.size();
    } else {
        const auto sep = prompt.rfind(std::string("\n\n").append(kQuestionTag));
        if (sep == std::string_view::npos) throw GenerationError("stub generator: prompt has no question block");
        knowledge = prompt.substr(0, sep);
        q_start = sep + 2 + kQuestionTag.size();
    }
    auto q_end = prompt.rfind(kAnswerTag);
    if (q_end == std::string_view::npos || q_end < q_start) q_end = prompt.size();
    const auto question = prompt.substr(q_start, q_end - q_start);

    std::string best;
    std::size_t best_overlap = 0;
    bool found = false;
    for (const auto& line : text::split_lines(knowledge)) {
        if (text::is_blank(line)) continue;
        const auto overlap = text::token_overlap(question, line);
        if (!found || overlap > best_overlap) {
            best = line;
            best_overlap = overlap;
            found = true;
        }
    }
    return found ? best : std::string(kUnknown);
}

RemoteGenerator::RemoteGenerator(GeneratorConfig cfg, std::shared_ptr<http::Transport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    if (!cfg_.endpoint) throw ConfigError("generator.endpoint is required for the remote generator");
}

std::string RemoteGenerator::generate(std::string_view prompt) const {
    nlohmann::json body{{"prompt", prompt}, {"max_tokens", cfg_.max_tokens}};
    std::string reply;
    try {
        reply = http::post_json(*transport_, *cfg_.endpoint, body.dump(), cfg_.timeout, cfg_.retries);
    } catch (const TransportError& e) {
        throw GenerationError(std::string("generator unavailable: ") + e.what());
    }
    auto parsed = nlohmann::json::parse(reply, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text") || !parsed["text"].is_string())
        throw GenerationError("generator reply has no text field");
    return parsed["text"].get<std::string>();
}

std::string generate(std::string_view prompt, const Generator& generator) {
    if (prompt.empty()) throw InvalidArgument("prompt is empty");
    return generator.generate(prompt);
}

KnowledgeBundle KnowledgeOps::refine(const QueryText& q, std::span<const DocumentText> docs, const Scorer& scorer,
                                     const RefineConfig& cfg) const {
    return crag::refine(q, docs, scorer, cfg);
}

KnowledgeBundle KnowledgeOps::select_external(const QueryText& q, std::span<const PageContent> pages,
                                              const Scorer& scorer, const RefineConfig& cfg) const {
    return crag::select_external(q, pages, scorer, cfg);
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::ScorerUnavailable: return "scorer_unavailable";
        case RunStatus::GenerationError: return "generation_error";
    }
    return "ok";
}

namespace {

class Runner {
public:
    Runner(const QueryText& q, std::span<const DocumentText> docs, const PipelineConfig& cfg, const PipelineDeps& deps,
           RunRecord& rec)
        : q_(q), docs_(docs), cfg_(cfg), deps_(deps), rec_(rec) {}

    KnowledgeBundle internal() {
        const auto t0 = Clock::now();
        auto bundle = cfg_.ablations.no_refinement ? raw_documents(docs_)
                                                   : deps_.ops.refine(q_, docs_, deps_.scorer, cfg_.refine);
        rec_.timings.refine_ms += elapsed_ms(t0);
        return bundle;
    }

    KnowledgeBundle external() {
        const auto t0 = Clock::now();
        const SearchQuery query = cfg_.ablations.no_rewriting ? SearchQuery({text::collapse_whitespace(q_.str())})
                                                              : deps_.rewriter.rewrite(q_, rec_.log);
        rec_.search_keywords = query.keywords();

        std::vector<SearchResult> results;
        try {
            results = search(query, deps_.search, cfg_.search);
        } catch (const SearchUnavailable& e) {
            rec_.log.push_back(std::string("external knowledge empty: ") + e.what());
            spdlog::warn("search failed for question '{}': {}; continuing without external knowledge", q_.str(),
                         e.what());
            rec_.timings.search_ms += elapsed_ms(t0);
            return KnowledgeBundle{KnowledgeKind::External, {}, {}};
        }
        for (const auto& r : results) rec_.searched_urls.push_back(r.url);
        const auto pages = deps_.fetcher.fetch_all(results, rec_.log);
        rec_.timings.search_ms += elapsed_ms(t0);

        const auto t1 = Clock::now();
        auto bundle = cfg_.ablations.no_selection ? all_paragraphs(pages)
                                                  : deps_.ops.select_external(q_, pages, deps_.scorer, cfg_.refine);
        rec_.timings.refine_ms += elapsed_ms(t1);
        return bundle;
    }

    void finish(KnowledgeBundle knowledge) {
        rec_.knowledge = std::move(knowledge);
        rec_.prompt = assemble_prompt(q_, rec_.knowledge);
        const auto t0 = Clock::now();
        try {
            rec_.answer = generate(rec_.prompt, deps_.generator);
        } catch (const GenerationError& e) {
            rec_.status = RunStatus::GenerationError;
            rec_.error = e.what();
        }
        rec_.timings.generate_ms = elapsed_ms(t0);
    }

private:
    const QueryText& q_;
    std::span<const DocumentText> docs_;
    const PipelineConfig& cfg_;
    const PipelineDeps& deps_;
    RunRecord& rec_;
};

}  // namespace

RunRecord run(const QueryText& question, std::span<const DocumentText> docs, const PipelineConfig& cfg,
              const PipelineDeps& deps) {
    if (docs.empty()) throw InvalidArgument("no documents");
    RunRecord rec;
    rec.question = question.str();
    Runner runner(question, docs, cfg, deps, rec);
    try {
        const auto t0 = Clock::now();
        rec.doc_scores = deps.scorer.score_batch(question, docs);
        rec.timings.score_ms = elapsed_ms(t0);

        rec.judgment = judge(rec.doc_scores, cfg.thresholds);
        rec.action = effective_action(*rec.judgment, cfg.thresholds, cfg.ablations);

        KnowledgeBundle knowledge;
        switch (*rec.action) {
            case Action::Correct:
                knowledge = runner.internal();
                break;
            case Action::Incorrect:
                knowledge = runner.external();
                break;
            case Action::Ambiguous: {
                auto in = runner.internal();
                knowledge = KnowledgeBundle::combine(in, runner.external());
                break;
            }
        }
        runner.finish(std::move(knowledge));
    } catch (const ScorerUnavailable& e) {
        rec.status = RunStatus::ScorerUnavailable;
        rec.error = e.what();
    }
    return rec;
}

RunRecord run_baseline(const QueryText& question, std::span<const DocumentText> docs, const PipelineConfig& cfg,
                       const PipelineDeps& deps, BaselineMode mode) {
    if (docs.empty()) throw InvalidArgument("no documents");
    RunRecord rec;
    rec.question = question.str();
    Runner runner(question, docs, cfg, deps, rec);
    try {
        KnowledgeBundle knowledge = raw_documents(docs);
        if (mode == BaselineMode::RagWithWeb) knowledge = KnowledgeBundle::combine(knowledge, runner.external());
        runner.finish(std::move(knowledge));
    } catch (const ScorerUnavailable& e) {
        rec.status = RunStatus::ScorerUnavailable;
        rec.error = e.what();
    }
    return rec;
}

PipelineServices::PipelineServices(const PipelineConfig& cfg, std::shared_ptr<http::Transport> transport) {
    cfg.validate();
    transport_ = cfg.offline ? std::make_shared<http::OfflineGuard>(std::move(transport)) : std::move(transport);
    scorer_ = make_scorer(cfg.scorer, transport_);
    if (cfg.search.endpoint) {
        search_ = std::make_unique<HttpSearchClient>(cfg.search, transport_);
    } else {
        search_ = std::make_unique<UnconfiguredSearchClient>();
    }
    fetcher_ = std::make_unique<PageFetcher>(cfg.search, transport_);
    if (cfg.rewriter.endpoint) {
        rewriter_ = std::make_unique<LlmRewriter>(*cfg.rewriter.endpoint, transport_, cfg.rewriter.timeout,
                                                  cfg.rewriter.retries);
    } else {
        rewriter_ = std::make_unique<KeywordRewriter>();
    }
    if (cfg.generator.endpoint) {
        generator_ = std::make_unique<RemoteGenerator>(cfg.generator, transport_);
    } else {
        generator_ = std::make_unique<StubGenerator>();
    }
}

PipelineDeps PipelineServices::deps() const {
    return PipelineDeps{*scorer_, *search_, *fetcher_, *rewriter_, *generator_, ops_};
}

}  // namespace crag
