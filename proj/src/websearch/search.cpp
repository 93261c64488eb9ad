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

#include <json.hpp>

#include <algorithm>
#include <cstdlib>

#include "crag/error.hpp"
#include "crag/websearch.hpp"

namespace crag {

void SearchConfig::validate() const {
    if (top_k_urls < 1) throw ConfigError("search.top_k_urls must be at least 1");
    if (retries < 0) throw ConfigError("search.retries must be non-negative");
    if (max_concurrent_fetches < 1) throw ConfigError("search.max_concurrent_fetches must be at least 1");
    if (fetch_timeout.count() <= 0) throw ConfigError("search.fetch_timeout_ms must be positive");
    if (endpoint && !http::is_absolute_url(*endpoint)) throw ConfigError("search.endpoint is not an absolute URL");
}

HttpSearchClient::HttpSearchClient(SearchConfig cfg, std::shared_ptr<http::Transport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    if (!cfg_.endpoint) throw ConfigError("search.endpoint is required for the HTTP search client");
}

std::vector<SearchResult> HttpSearchClient::query(const std::string& q) {
    http::Request req;
    req.url = *cfg_.endpoint + (cfg_.endpoint->find('?') == std::string::npos ? "?" : "&") + "q=" + http::url_encode(q);
    req.timeout = cfg_.fetch_timeout;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) req.headers.emplace_back("X-API-Key", key);
    }

    http::Response resp;
    try {
        resp = http::send_with_retries(*transport_, req, cfg_.retries);
    } catch (const TransportError& e) {
        throw SearchUnavailable(std::string("search unavailable: ") + e.what());
    }

    auto parsed = nlohmann::json::parse(resp.body, nullptr, false);
    if (parsed.is_object() && parsed.contains("results")) parsed = parsed["results"];
    if (parsed.is_discarded() || !parsed.is_array())
        throw SearchUnavailable("search reply is not a JSON result list");

    std::vector<SearchResult> out;
    for (const auto& item : parsed) {
        if (!item.is_object() || !item.contains("url") || !item["url"].is_string()) continue;
        auto url = item["url"].get<std::string>();
        if (!http::is_absolute_url(url)) continue;
        SearchResult r{std::move(url), std::nullopt, static_cast<int>(out.size()) + 1};
        if (item.contains("title") && item["title"].is_string()) r.title = item["title"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SearchResult> UnconfiguredSearchClient::query(const std::string&) {
    throw SearchUnavailable("no search endpoint configured");
}

bool is_wikipedia_host(std::string_view url) {
    try {
        const auto host = http::parse_url(url).host;
        return host == "wikipedia.org" || host.ends_with(".wikipedia.org");
    } catch (const InvalidArgument&) {
        return false;
    }
}

std::vector<SearchResult> prioritize(std::vector<SearchResult> results, const SearchConfig& cfg) {
    if (cfg.prefer_wikipedia) {
        std::stable_partition(results.begin(), results.end(),
                              [](const SearchResult& r) { return is_wikipedia_host(r.url); });
    }
    if (results.size() > static_cast<std::size_t>(cfg.top_k_urls)) results.resize(static_cast<std::size_t>(cfg.top_k_urls));
    for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = static_cast<int>(i) + 1;
    return results;
}

std::vector<SearchResult> search(const SearchQuery& q, SearchClient& client, const SearchConfig& cfg) {
    return prioritize(client.query(q.joined()), cfg);
}

}  // namespace crag
