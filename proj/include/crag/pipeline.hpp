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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crag/http.hpp"
#include "crag/refinement.hpp"
#include "crag/scoring.hpp"
#include "crag/trigger.hpp"
#include "crag/websearch.hpp"

namespace crag {

/// Switches for the ablation experiments. `disable_action` and `only_action`
/// are mutually exclusive.
struct AblationFlags {
    std::optional<Action> disable_action;
    std::optional<Action> only_action;
    bool no_refinement = false;  // feed raw documents as internal knowledge
    bool no_rewriting = false;   // search with the raw question
    bool no_selection = false;   // keep every fetched paragraph

    void validate() const;
};

/// The action actually executed once ablations are applied:
///  - only_action forces that action;
///  - disabling Correct or Incorrect turns those judgments into Ambiguous;
///  - disabling Ambiguous leaves one threshold: max score > upper is Correct,
///    everything else Incorrect.
Action effective_action(const ActionJudgment& j, const Thresholds& t, const AblationFlags& flags);

struct GeneratorConfig {
    std::optional<std::string> endpoint;  // absent: offline stub generator
    int max_tokens = 256;
    std::chrono::milliseconds timeout{60'000};
    int retries = 1;
};

struct RewriterConfig {
    std::optional<std::string> endpoint;  // absent: deterministic keyword rewriter
    std::chrono::milliseconds timeout{30'000};
    int retries = 1;
};

struct PipelineConfig {
    Thresholds thresholds = Thresholds::popqa();
    std::optional<std::string> threshold_preset = "popqa";
    RefineConfig refine;
    SearchConfig search;
    ScorerConfig scorer;
    GeneratorConfig generator;
    RewriterConfig rewriter;
    AblationFlags ablations;
    int workers = 4;
    bool offline = false;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Generation

/// Knowledge block, blank line, "Question: ...", newline, "Answer:". With no
/// knowledge only the question block remains.
std::string assemble_prompt(const QueryText& question, const KnowledgeBundle& knowledge);

class Generator {
public:
    virtual ~Generator() = default;
    /// Throws GenerationError.
    virtual std::string generate(std::string_view prompt) const = 0;
};

/// Offline generator for tests: answers with the first knowledge line that
/// shares the most tokens with the question, or "UNKNOWN" without knowledge.
class StubGenerator final : public Generator {
public:
    static constexpr std::string_view kUnknown = "UNKNOWN";
    std::string generate(std::string_view prompt) const override;
};

/// POST {"prompt", "max_tokens"} -> {"text"}.
class RemoteGenerator final : public Generator {
public:
    RemoteGenerator(GeneratorConfig cfg, std::shared_ptr<http::Transport> transport);
    std::string generate(std::string_view prompt) const override;

private:
    GeneratorConfig cfg_;
    std::shared_ptr<http::Transport> transport_;
};

/// Rejects an empty prompt, then delegates.
std::string generate(std::string_view prompt, const Generator& generator);

// ---------------------------------------------------------------------------
// Run

/// The knowledge operations a run invokes; overridable so tests can observe
/// which branch touched what.
class KnowledgeOps {
public:
    virtual ~KnowledgeOps() = default;
    virtual KnowledgeBundle refine(const QueryText& q, std::span<const DocumentText> docs, const Scorer& scorer,
                                   const RefineConfig& cfg) const;
    virtual KnowledgeBundle select_external(const QueryText& q, std::span<const PageContent> pages,
                                            const Scorer& scorer, const RefineConfig& cfg) const;
};

/// Everything a run calls out to. All members must outlive the run and be
/// safe to share between concurrent runs.
struct PipelineDeps {
    const Scorer& scorer;
    SearchClient& search;
    PageFetcher& fetcher;
    const Rewriter& rewriter;
    const Generator& generator;
    const KnowledgeOps& ops;
};

enum class RunStatus { Ok, ScorerUnavailable, GenerationError };
std::string_view to_string(RunStatus s);

struct StageTimings {
    double score_ms = 0;
    double refine_ms = 0;
    double search_ms = 0;
    double generate_ms = 0;
};

struct RunRecord {
    std::string question;
    std::vector<RelevanceScore> doc_scores;
    std::optional<ActionJudgment> judgment;  // as judged from doc_scores
    std::optional<Action> action;            // as executed, after ablations
    KnowledgeBundle knowledge;
    std::vector<std::string> search_keywords;
    std::vector<std::string> searched_urls;
    std::string prompt;
    std::string answer;
    RunStatus status = RunStatus::Ok;
    std::string error;
    RunLog log;
    StageTimings timings;
};

/// Score, judge, branch, assemble knowledge, generate. A scorer outage stops
/// the run with status ScorerUnavailable; a search outage degrades to empty
/// external knowledge. Throws InvalidArgument when `docs` is empty.
RunRecord run(const QueryText& question, std::span<const DocumentText> docs, const PipelineConfig& cfg,
              const PipelineDeps& deps);

enum class BaselineMode { PlainRag, RagWithWeb };

/// Standard RAG: raw documents prepended, no evaluation. With web, external
/// knowledge from the search path is appended for every query.
RunRecord run_baseline(const QueryText& question, std::span<const DocumentText> docs, const PipelineConfig& cfg,
                       const PipelineDeps& deps, BaselineMode mode);

/// Owns the concrete clients a config calls for. Requests go through
/// `transport` (wrapped in an OfflineGuard when cfg.offline is set).
class PipelineServices {
public:
    PipelineServices(const PipelineConfig& cfg, std::shared_ptr<http::Transport> transport);

    PipelineDeps deps() const;

private:
    std::shared_ptr<http::Transport> transport_;
    std::unique_ptr<Scorer> scorer_;
    std::unique_ptr<SearchClient> search_;
    std::unique_ptr<PageFetcher> fetcher_;
    std::unique_ptr<Rewriter> rewriter_;
    std::unique_ptr<Generator> generator_;
    KnowledgeOps ops_;
};

}  // namespace crag
