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

// Oracles and doubles shared by the unit tests and the acceptance binary.
// The oracles are written independently of the library code they check.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crag/config.hpp"
#include "crag/error.hpp"
#include "crag/harness.hpp"
#include "crag/mock_server.hpp"
#include "crag/pipeline.hpp"

namespace crag::testing {

inline std::filesystem::path fixture_dir() { return CRAG_FIXTURE_DIR; }

// ---------------------------------------------------------------------------
// Oracles

/// Word set: maximal runs of ASCII letters, digits or non-ASCII bytes, lowercased.
inline std::set<std::string> word_set(const std::string& s) {
    std::set<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(cur);
    return out;
}

inline double lexical_oracle(const std::string& q, const std::string& d) {
    const auto u = word_set(q);
    if (u.empty()) return -1.0;
    const auto w = word_set(d);
    std::size_t hits = 0;
    for (const auto& t : u) hits += w.count(t);
    return 2.0 * static_cast<double>(hits) / static_cast<double>(u.size()) - 1.0;
}

inline Action trigger_oracle(const std::vector<double>& scores, double upper, double lower) {
    bool any_high = false;
    bool all_low = true;
    for (double s : scores) {
        if (s > upper) any_high = true;
        if (!(s < lower)) all_low = false;
    }
    if (any_high) return Action::Correct;
    if (all_low) return Action::Incorrect;
    return Action::Ambiguous;
}

/// Selection by pairwise rank counting: position i survives when it passes the
/// threshold and fewer than k passing positions beat it (higher score, or equal
/// score and earlier). Nothing passing: the earliest maximum.
inline std::vector<std::size_t> selection_oracle(const std::vector<double>& s, double threshold, std::size_t k) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > threshold)) continue;
        std::size_t beaten_by = 0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (j == i || !(s[j] > threshold)) continue;
            if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++beaten_by;
        }
        if (beaten_by < k) kept.push_back(i);
    }
    if (kept.empty() && !s.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s[i] > s[best]) best = i;
        kept.push_back(best);
    }
    return kept;
}

// ---------------------------------------------------------------------------
// Doubles

/// Returns the score registered for an exact text, `fallback` otherwise.
class TableScorer final : public Scorer {
public:
    explicit TableScorer(std::map<std::string, double> table, double fallback = -1.0)
        : table_(std::move(table)), fallback_(fallback) {}

    RelevanceScore score_text(const QueryText&, std::string_view text) const override {
        ++calls_;
        const auto it = table_.find(std::string(text));
        return RelevanceScore(it == table_.end() ? fallback_ : it->second);
    }
    std::size_t calls() const { return calls_.load(); }

private:
    std::map<std::string, double> table_;
    double fallback_;
    mutable std::atomic<std::size_t> calls_{0};
};

class FailingScorer final : public Scorer {
public:
    RelevanceScore score_text(const QueryText&, std::string_view) const override {
        throw ScorerUnavailable("scorer offline");
    }
};

/// Fixed result list; counts queries and remembers the last one.
class CountingSearch final : public SearchClient {
public:
    explicit CountingSearch(std::vector<SearchResult> results = {}, bool fail = false)
        : results_(std::move(results)), fail_(fail) {}

    std::vector<SearchResult> query(const std::string& q) override {
        std::lock_guard lock(mu_);
        ++calls_;
        last_ = q;
        if (fail_) throw SearchUnavailable("search engine down");
        return results_;
    }
    std::size_t calls() const {
        std::lock_guard lock(mu_);
        return calls_;
    }
    std::string last() const {
        std::lock_guard lock(mu_);
        return last_;
    }

private:
    std::vector<SearchResult> results_;
    bool fail_;
    mutable std::mutex mu_;
    std::size_t calls_ = 0;
    std::string last_;
};

class CountingOps final : public KnowledgeOps {
public:
    KnowledgeBundle refine(const QueryText& q, std::span<const DocumentText> docs, const Scorer& scorer,
                           const RefineConfig& cfg) const override {
        ++refine_calls;
        return KnowledgeOps::refine(q, docs, scorer, cfg);
    }
    KnowledgeBundle select_external(const QueryText& q, std::span<const PageContent> pages, const Scorer& scorer,
                                    const RefineConfig& cfg) const override {
        ++select_calls;
        return KnowledgeOps::select_external(q, pages, scorer, cfg);
    }
    mutable std::atomic<std::size_t> refine_calls{0};
    mutable std::atomic<std::size_t> select_calls{0};
};

/// Serves a fixed set of pages; counts requests.
inline std::shared_ptr<http::HandlerTransport> page_transport(std::map<std::string, std::string> pages) {
    return std::make_shared<http::HandlerTransport>([pages = std::move(pages)](const http::Request& r) {
        const auto it = pages.find(r.url);
        if (it == pages.end()) return http::Response{404, "", "text/plain"};
        return http::Response{200, it->second, "text/html"};
    });
}

/// Deps built from parts owned by the caller.
struct Bench {
    std::unique_ptr<Scorer> scorer = std::make_unique<LexicalScorer>();
    std::unique_ptr<SearchClient> search = std::make_unique<CountingSearch>();
    std::shared_ptr<http::Transport> transport = page_transport({});
    std::unique_ptr<PageFetcher> fetcher;
    KeywordRewriter rewriter;
    StubGenerator generator;
    CountingOps ops;

    PipelineDeps deps() {
        if (!fetcher) {
            SearchConfig sc;
            sc.cache_dir.clear();
            fetcher = std::make_unique<PageFetcher>(sc, transport);
        }
        return PipelineDeps{*scorer, *search, *fetcher, rewriter, generator, ops};
    }
};

// ---------------------------------------------------------------------------
// Fixture

/// Config for fixture runs against an in-process mock backend at `base`.
inline PipelineConfig fixture_config(const std::string& base) {
    nlohmann::json layer = config::load_file(fixture_dir() / "config.json");
    config::set_key(layer, "search.endpoint", base + "/search");
    return config::build({layer});
}

/// Mock backend serving the fixture pages, reachable through a HandlerTransport
/// (no sockets involved).
struct InProcessMock {
    static constexpr const char* kBase = "http://127.0.0.1:8089";
    std::shared_ptr<mock::MockBackend> backend =
        std::make_shared<mock::MockBackend>(mock::MockData::from_directory(fixture_dir() / "mock"), kBase);
    std::shared_ptr<http::HandlerTransport> transport = std::make_shared<http::HandlerTransport>(
        [b = backend](const http::Request& r) { return b->handle(r); });
};

inline harness::ExperimentReport run_fixture(harness::Mode mode, std::optional<double> p,
                                             const std::function<void(PipelineConfig&)>& tweak = {}) {
    InProcessMock mock;
    auto cfg = fixture_config(InProcessMock::kBase);
    if (tweak) tweak(cfg);
    PipelineServices services(cfg, mock.transport);
    const auto dataset = harness::load_dataset(fixture_dir() / "dataset.jsonl");
    std::optional<harness::Degradation> deg;
    if (p) deg = harness::Degradation{*p, 7};
    return harness::run_experiment(dataset, cfg, mode, deg, services.deps());
}

/// Random temporary directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("crag-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace crag::testing
