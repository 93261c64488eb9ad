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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crag/http.hpp"
#include "crag/refinement.hpp"
#include "crag/scoring.hpp"

namespace crag {

/// Free-form notes collected during one run (fallbacks, skipped URLs, ...).
using RunLog = std::vector<std::string>;

/// One to three non-blank search keywords.
class SearchQuery {
public:
    static constexpr std::size_t kMaxKeywords = 3;

    /// Throws InvalidArgument if empty, longer than three, or any keyword is blank.
    explicit SearchQuery(std::vector<std::string> keywords);

    const std::vector<std::string>& keywords() const noexcept { return keywords_; }
    /// The string sent to the engine: keywords joined by single spaces.
    std::string joined() const;

private:
    std::vector<std::string> keywords_;
};

struct SearchResult {
    std::string url;
    std::optional<std::string> title;
    int rank = 0;

    bool operator==(const SearchResult&) const = default;
};

struct PageContent {
    std::string url;
    std::vector<std::string> paragraphs;

    bool operator==(const PageContent&) const = default;
};

struct SearchConfig {
    std::optional<std::string> endpoint;
    int top_k_urls = 5;
    bool prefer_wikipedia = true;
    std::chrono::milliseconds fetch_timeout{10'000};
    std::filesystem::path cache_dir = ".crag-cache";  // empty disables the page cache
    int retries = 1;
    int max_concurrent_fetches = 4;
    std::string api_key_env = "CRAG_SEARCH_API_KEY";

    void validate() const;
};

// ---------------------------------------------------------------------------
// Query rewriting

/// Few-shot keyword-extraction prompt; "[question]" marks the slot.
std::string_view rewrite_prompt_template();
std::string render_rewrite_prompt(std::string_view question);

/// Keywords from an LLM reply: the text after the last "query:" (or the first
/// non-blank line when absent), split on commas, trimmed, at most three.
/// Throws InvalidArgument when nothing usable remains.
SearchQuery parse_rewrite_reply(std::string_view reply);

bool is_stopword(std::string_view lowercase_word);

class Rewriter {
public:
    virtual ~Rewriter() = default;
    virtual SearchQuery rewrite(const QueryText& question, RunLog& log) const = 0;
};

/// Deterministic, offline keyword extraction: drops stopwords and
/// interrogatives, merges runs of capitalized words into one keyword, keeps
/// the first three keywords in question order.
class KeywordRewriter final : public Rewriter {
public:
    SearchQuery rewrite(const QueryText& question, RunLog& log) const override;
};

/// Asks a completion endpoint (POST {"prompt","max_tokens"} -> {"text"}) with
/// the few-shot prompt. Any failure falls back to KeywordRewriter and is noted
/// in the run log.
class LlmRewriter final : public Rewriter {
public:
    LlmRewriter(std::string endpoint, std::shared_ptr<http::Transport> transport,
                std::chrono::milliseconds timeout = std::chrono::seconds(30), int retries = 1);
    SearchQuery rewrite(const QueryText& question, RunLog& log) const override;

private:
    std::string endpoint_;
    std::shared_ptr<http::Transport> transport_;
    std::chrono::milliseconds timeout_;
    int retries_;
    KeywordRewriter fallback_;
};

// ---------------------------------------------------------------------------
// Search

class SearchClient {
public:
    virtual ~SearchClient() = default;
    /// Raw engine results in engine order. Throws SearchUnavailable.
    virtual std::vector<SearchResult> query(const std::string& q) = 0;
};

/// GET {endpoint}?q=... -> [{"url","title"}, ...] or {"results": [...]}.
/// Sends the key from `api_key_env` (if set) as X-API-Key.
class HttpSearchClient final : public SearchClient {
public:
    HttpSearchClient(SearchConfig cfg, std::shared_ptr<http::Transport> transport);
    std::vector<SearchResult> query(const std::string& q) override;

private:
    SearchConfig cfg_;
    std::shared_ptr<http::Transport> transport_;
};

/// Stand-in when no endpoint is configured: every query is unavailable.
class UnconfiguredSearchClient final : public SearchClient {
public:
    std::vector<SearchResult> query(const std::string& q) override;
};

bool is_wikipedia_host(std::string_view url);

/// Stable-partitions Wikipedia URLs to the front (when preferred), keeps the
/// first top_k_urls, and renumbers ranks from 1.
std::vector<SearchResult> prioritize(std::vector<SearchResult> results, const SearchConfig& cfg);

std::vector<SearchResult> search(const SearchQuery& q, SearchClient& client, const SearchConfig& cfg);

// ---------------------------------------------------------------------------
// Page extraction and fetching

std::string decode_entities(std::string_view s);

/// Text of every <p> region: tags stripped, entities decoded, whitespace
/// collapsed, empty paragraphs dropped. Script, style and comments are ignored.
std::vector<std::string> extract_html_paragraphs(std::string_view html);

/// One paragraph per blank-line separated block, whitespace collapsed.
std::vector<std::string> extract_text_blocks(std::string_view body);

/// An html content type decides, text/plain rules it out, anything else is sniffed.
bool looks_like_html(std::string_view body, std::string_view content_type);

PageContent extract_page(std::string url, std::string_view body, std::string_view content_type);

/// On-disk page cache: one JSON file {url, fetched_at, paragraphs} per URL,
/// named by the SHA-256 hex digest of the URL.
class PageCache {
public:
    explicit PageCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    static std::string key(std::string_view url);
    std::filesystem::path path_for(std::string_view url) const;
    std::optional<PageContent> load(std::string_view url) const;
    /// Writes through a temporary file and renames, so concurrent writers of
    /// the same URL never leave a torn file.
    void store(const PageContent& page) const;

private:
    std::filesystem::path dir_;
};

class PageFetcher {
public:
    PageFetcher(SearchConfig cfg, std::shared_ptr<http::Transport> transport);
    virtual ~PageFetcher() = default;

    /// Cache first; a hit performs no request. Throws FetchError.
    virtual PageContent fetch(const SearchResult& r);

    /// Fetches concurrently, skipping (and logging) failed URLs. Output keeps
    /// the order of `results`.
    std::vector<PageContent> fetch_all(std::span<const SearchResult> results, RunLog& log);

private:
    SearchConfig cfg_;
    std::shared_ptr<http::Transport> transport_;
    std::optional<PageCache> cache_;
};

/// Treats every paragraph as a strip keyed by (page order, paragraph order)
/// and filters it exactly like internal strips. No pages, no paragraphs: empty bundle.
KnowledgeBundle select_external(const QueryText& question, std::span<const PageContent> pages, const Scorer& scorer,
                                const RefineConfig& cfg);

/// Every paragraph, unfiltered and unscored.
KnowledgeBundle all_paragraphs(std::span<const PageContent> pages);

}  // namespace crag
