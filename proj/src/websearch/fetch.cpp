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

#include <openssl/evp.h>

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "crag/error.hpp"
#include "crag/parallel.hpp"
#include "crag/text.hpp"
#include "crag/websearch.hpp"

namespace crag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

}  // namespace

std::string PageCache::key(std::string_view url) { return sha256_hex(url); }

fs::path PageCache::path_for(std::string_view url) const { return dir_ / (key(url) + ".json"); }

std::optional<PageContent> PageCache::load(std::string_view url) const {
    std::ifstream in(path_for(url), std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    auto j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("url") || j["url"] != url || !j.contains("paragraphs") ||
        !j["paragraphs"].is_array())
        return std::nullopt;
    PageContent page{std::string(url), {}};
    for (const auto& p : j["paragraphs"]) {
        if (!p.is_string()) return std::nullopt;
        page.paragraphs.push_back(p.get<std::string>());
    }
    return page;
}

void PageCache::store(const PageContent& page) const {
    static std::atomic<unsigned long> counter{0};
    fs::create_directories(dir_);
    const json j{{"url", page.url}, {"fetched_at", utc_now_iso8601()}, {"paragraphs", page.paragraphs}};
    const auto final_path = path_for(page.url);
    std::ostringstream tmp_name;
    tmp_name << final_path.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
             << '.' << counter++;
    const auto tmp_path = dir_ / tmp_name.str();
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write cache file " + tmp_path.string());
        out << j.dump(2) << '\n';
    }
    std::error_code ec;
    fs::rename(tmp_path, final_path, ec);
    if (ec) {
        fs::remove(tmp_path, ec);
        throw Error("cannot move cache file into place: " + final_path.string());
    }
}

PageFetcher::PageFetcher(SearchConfig cfg, std::shared_ptr<http::Transport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    if (!cfg_.cache_dir.empty()) cache_.emplace(cfg_.cache_dir);
}

PageContent PageFetcher::fetch(const SearchResult& r) {
    if (!http::is_absolute_url(r.url)) throw FetchError(r.url, "not an absolute URL");
    if (cache_) {
        if (auto hit = cache_->load(r.url)) return *hit;
    }
    http::Request req;
    req.url = r.url;
    req.timeout = cfg_.fetch_timeout;
    req.headers.emplace_back("Accept", "text/html, text/plain;q=0.9");
    http::Response resp;
    try {
        resp = http::send_with_retries(*transport_, req, cfg_.retries);
    } catch (const TransportError& e) {
        throw FetchError(r.url, e.what());
    }
    PageContent page = extract_page(r.url, resp.body, resp.content_type);
    if (cache_) cache_->store(page);
    return page;
}

std::vector<PageContent> PageFetcher::fetch_all(std::span<const SearchResult> results, RunLog& log) {
    std::vector<std::optional<PageContent>> pages(results.size());
    std::vector<std::string> errors(results.size());
    parallel_for(results.size(), static_cast<std::size_t>(cfg_.max_concurrent_fetches), [&](std::size_t i) {
        try {
            pages[i] = fetch(results[i]);
        } catch (const FetchError& e) {
            errors[i] = e.what();
        }
    });
    std::vector<PageContent> out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (pages[i]) {
            out.push_back(std::move(*pages[i]));
        } else {
            log.push_back("skipped URL: " + errors[i]);
        }
    }
    return out;
}

namespace {

std::vector<KnowledgeStrip> paragraph_strips(std::span<const PageContent> pages) {
    std::vector<KnowledgeStrip> strips;
    for (const auto& page : pages) {
        for (std::size_t i = 0; i < page.paragraphs.size(); ++i) {
            if (text::is_blank(page.paragraphs[i])) continue;
            strips.push_back(KnowledgeStrip{page.url, i, page.paragraphs[i], std::nullopt});
        }
    }
    return strips;
}

}  // namespace

KnowledgeBundle select_external(const QueryText& question, std::span<const PageContent> pages, const Scorer& scorer,
                                const RefineConfig& cfg) {
    auto strips = paragraph_strips(pages);
    if (strips.empty()) return KnowledgeBundle{KnowledgeKind::External, {}, {}};
    return KnowledgeBundle::from_strips(KnowledgeKind::External, filter_strips(question, strips, scorer, cfg));
}

KnowledgeBundle all_paragraphs(std::span<const PageContent> pages) {
    return KnowledgeBundle::from_strips(KnowledgeKind::External, paragraph_strips(pages));
}

}  // namespace crag
