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

#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>

#include "crag/error.hpp"
#include "crag/websearch.hpp"
#include "support.hpp"

using namespace crag;
using crag::testing::page_transport;
using crag::testing::TableScorer;
using crag::testing::TempDir;

namespace {

std::vector<std::string> rewrite(std::string_view q) {
    RunLog log;
    return KeywordRewriter{}.rewrite(QueryText(q), log).keywords();
}

SearchConfig no_cache() {
    SearchConfig c;
    c.cache_dir.clear();
    return c;
}

}  // namespace

TEST_CASE("search query holds one to three keywords") {
    CHECK(SearchQuery({"a", "b c"}).joined() == "a b c");
    CHECK_THROWS_AS(SearchQuery({}), InvalidArgument);
    CHECK_THROWS_AS(SearchQuery({"a", "b", "c", "d"}), InvalidArgument);
    CHECK_THROWS_AS(SearchQuery({"a", " "}), InvalidArgument);
}

TEST_CASE("keyword rewriter reproduces the few-shot exemplars") {
    CHECK(rewrite("What is Henry Feilden's occupation?") == std::vector<std::string>{"Henry Feilden", "occupation"});
    CHECK(rewrite("In what city was Billy Carlson born?") ==
          std::vector<std::string>{"city", "Billy Carlson", "born"});
}

TEST_CASE("keyword rewriter edge cases") {
    CHECK(rewrite("Who painted the Mona Lisa?") == std::vector<std::string>{"painted", "Mona Lisa"});
    // At most three, first in question order.
    CHECK(rewrite("largest ocean planet river mountain") ==
          std::vector<std::string>{"largest", "ocean", "planet"});
    // Only stopwords: the whole question without trailing punctuation.
    CHECK(rewrite("Who is it?") == std::vector<std::string>{"Who is it"});
    CHECK(rewrite("Paris, France") == std::vector<std::string>{"Paris", "France"});
}

TEST_CASE("rewrite prompt and reply parsing") {
    const auto p = render_rewrite_prompt("Who wrote Dracula?");
    CHECK(p.find("Who wrote Dracula?") != std::string::npos);
    CHECK(p.find("[question]") == std::string::npos);
    CHECK(rewrite_prompt_template().find("[question]") != std::string::npos);

    CHECK(parse_rewrite_reply("query: Bram Stoker, Dracula").keywords() ==
          std::vector<std::string>{"Bram Stoker", "Dracula"});
    CHECK(parse_rewrite_reply("question: x\nquery: a\nquery:  b ,c,d,e\n").keywords() ==
          std::vector<std::string>{"b", "c", "d"});
    CHECK(parse_rewrite_reply("\n  just words  \n").keywords() == std::vector<std::string>{"just words"});
    CHECK_THROWS_AS(parse_rewrite_reply("query: , ,"), InvalidArgument);
}

TEST_CASE("llm rewriter uses the reply and falls back on failure") {
    auto ok = std::make_shared<http::HandlerTransport>([](const http::Request& r) {
        CHECK(nlohmann::json::parse(r.body)["prompt"].get<std::string>().find("Who wrote Dracula?") !=
              std::string::npos);
        return http::Response{200, R"({"text": " Bram Stoker, Dracula"})", "application/json"};
    });
    RunLog log;
    CHECK(LlmRewriter("http://127.0.0.1:1/generate", ok).rewrite(QueryText("Who wrote Dracula?"), log).keywords() ==
          std::vector<std::string>{"Bram Stoker", "Dracula"});
    CHECK(log.empty());

    auto down = std::make_shared<http::HandlerTransport>([](const http::Request&) { return http::Response{500, "", ""}; });
    const auto q = LlmRewriter("http://127.0.0.1:1/generate", down, std::chrono::seconds(1), 0)
                       .rewrite(QueryText("Who wrote Dracula?"), log);
    CHECK(q.keywords() == std::vector<std::string>{"wrote", "Dracula"});
    REQUIRE(log.size() == 1);
    CHECK(log[0].find("fallback") != std::string::npos);
}

TEST_CASE("http search client sends the joined query and the api key") {
    ::setenv("CRAG_TEST_SEARCH_KEY", "secret", 1);
    auto t = std::make_shared<http::HandlerTransport>([](const http::Request& r) {
        CHECK(r.url == "http://127.0.0.1:1/search?q=Mona%20Lisa%20painter");
        REQUIRE(r.headers.size() == 1);
        CHECK(r.headers[0] == std::pair<std::string, std::string>{"X-API-Key", "secret"});
        return http::Response{200,
                              R"({"results": [{"url": "https://a.com/x", "title": "A"}, {"url": "relative"},
                                  {"url": "https://en.wikipedia.org/wiki/Mona_Lisa"}]})",
                              "application/json"};
    });
    SearchConfig cfg;
    cfg.endpoint = "http://127.0.0.1:1/search";
    cfg.api_key_env = "CRAG_TEST_SEARCH_KEY";
    HttpSearchClient client(cfg, t);
    const auto res = search(SearchQuery({"Mona Lisa", "painter"}), client, cfg);
    REQUIRE(res.size() == 2);
    CHECK(res[0].url == "https://en.wikipedia.org/wiki/Mona_Lisa");
    CHECK(res[0].rank == 1);
    CHECK(res[1].title == "A");
    ::unsetenv("CRAG_TEST_SEARCH_KEY");
}

TEST_CASE("search failures raise SearchUnavailable") {
    SearchConfig cfg;
    cfg.endpoint = "http://127.0.0.1:1/search";
    cfg.retries = 0;
    auto garbage = std::make_shared<http::HandlerTransport>(
        [](const http::Request&) { return http::Response{200, "<html>", "text/html"}; });
    CHECK_THROWS_AS(HttpSearchClient(cfg, garbage).query("x"), SearchUnavailable);
    auto down = std::make_shared<http::HandlerTransport>(
        [](const http::Request&) -> http::Response { throw TransportError("refused"); });
    CHECK_THROWS_AS(HttpSearchClient(cfg, down).query("x"), SearchUnavailable);
    CHECK_THROWS_AS(UnconfiguredSearchClient{}.query("x"), SearchUnavailable);
}

TEST_CASE("prioritize moves wikipedia first, truncates, renumbers") {
    std::vector<SearchResult> in;
    for (const auto* u : {"https://a.com/1", "https://en.wikipedia.org/wiki/A", "https://b.com/2",
                          "https://de.wikipedia.org/wiki/B", "https://c.com/3", "https://d.com/4"})
        in.push_back({u, std::nullopt, 0});
    SearchConfig cfg;
    cfg.top_k_urls = 4;
    const auto out = prioritize(in, cfg);
    REQUIRE(out.size() == 4);
    CHECK(out[0].url == "https://en.wikipedia.org/wiki/A");
    CHECK(out[1].url == "https://de.wikipedia.org/wiki/B");
    CHECK(out[2].url == "https://a.com/1");
    CHECK(out[3].url == "https://b.com/2");
    for (int i = 0; i < 4; ++i) CHECK(out[i].rank == i + 1);

    cfg.prefer_wikipedia = false;
    CHECK(prioritize(in, cfg)[0].url == "https://a.com/1");
    CHECK_FALSE(is_wikipedia_host("https://notwikipedia.org/x"));
}

TEST_CASE("html paragraph extraction") {
    CHECK(extract_html_paragraphs("<p>A b.</p><p> </p><p>C&amp;D</p>") == std::vector<std::string>{"A b.", "C&D"});
    CHECK(extract_html_paragraphs("<P class=x>Up <b>bold</b>\n text</P><pre>code</pre>") ==
          std::vector<std::string>{"Up bold text"});
    CHECK(extract_html_paragraphs("<script>var s='<p>no</p>';</script><!-- <p>no</p> --><p>yes</p>") ==
          std::vector<std::string>{"yes"});
    CHECK(extract_html_paragraphs("<p>one<p>two</p>") == std::vector<std::string>{"one", "two"});
    CHECK(decode_entities("&lt;&gt;&quot;&#39;&#x41;&nbsp;&bogus;") == "<>\"'A\xc2\xa0&bogus;");
}

TEST_CASE("plain text blocks") {
    CHECK(extract_text_blocks("x\n\ny") == std::vector<std::string>{"x", "y"});
    CHECK(extract_text_blocks("a\nb\n \n\n c ") == std::vector<std::string>{"a b", "c"});
    CHECK(looks_like_html("", "text/html; charset=utf-8"));
    CHECK(looks_like_html("  <!DOCTYPE html>", "application/octet-stream"));
    CHECK_FALSE(looks_like_html("x\n\ny", "text/plain"));
    CHECK(extract_page("u", "x\n\ny", "text/plain").paragraphs.size() == 2);
}

TEST_CASE("second fetch of a url is served from the cache") {
    TempDir dir;
    auto t = page_transport({{"http://127.0.0.1:1/p", "<p>One.</p><p>Two.</p>"}});
    SearchConfig cfg;
    cfg.cache_dir = dir.path;
    PageFetcher f(cfg, t);
    const SearchResult r{"http://127.0.0.1:1/p", std::nullopt, 1};
    const auto first = f.fetch(r);
    const auto second = f.fetch(r);
    CHECK(t->calls() == 1);
    CHECK(first == second);
    CHECK(first.paragraphs == std::vector<std::string>{"One.", "Two."});

    // Cache file layout.
    const auto path = PageCache(dir.path).path_for(r.url);
    CHECK(path.filename().string().size() == 64 + 5);
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in);
    CHECK(j["url"] == r.url);
    CHECK(j["paragraphs"].size() == 2);
    CHECK(j["fetched_at"].get<std::string>().size() == 20);

    // A fresh fetcher over the same directory also hits.
    PageFetcher again(cfg, t);
    CHECK(again.fetch(r) == first);
    CHECK(t->calls() == 1);
}

TEST_CASE("cache key is the sha-256 of the url") {
    CHECK(PageCache::key("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(PageCache::key("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("corrupt cache entries are refetched") {
    TempDir dir;
    auto t = page_transport({{"http://127.0.0.1:1/p", "<p>Fresh.</p>"}});
    SearchConfig cfg;
    cfg.cache_dir = dir.path;
    std::ofstream(PageCache(dir.path).path_for("http://127.0.0.1:1/p")) << "{not json";
    CHECK(PageFetcher(cfg, t).fetch({"http://127.0.0.1:1/p", std::nullopt, 1}).paragraphs ==
          std::vector<std::string>{"Fresh."});
    CHECK(t->calls() == 1);
}

TEST_CASE("fetch_all skips failures, logs them, keeps order") {
    auto t = page_transport({{"http://127.0.0.1:1/a", "<p>A</p>"}, {"http://127.0.0.1:1/c", "<p>C</p>"}});
    PageFetcher f(no_cache(), t);
    std::vector<SearchResult> rs{{"http://127.0.0.1:1/a", std::nullopt, 1},
                                 {"http://127.0.0.1:1/missing", std::nullopt, 2},
                                 {"http://127.0.0.1:1/c", std::nullopt, 3}};
    RunLog log;
    const auto pages = f.fetch_all(rs, log);
    REQUIRE(pages.size() == 2);
    CHECK(pages[0].url == rs[0].url);
    CHECK(pages[1].url == rs[2].url);
    REQUIRE(log.size() == 1);
    CHECK(log[0].find("missing") != std::string::npos);
}

TEST_CASE("offline fetches of remote urls are skipped") {
    auto inner = page_transport({});
    auto guard = std::make_shared<http::OfflineGuard>(inner);
    PageFetcher f(no_cache(), guard);
    RunLog log;
    std::vector<SearchResult> rs{{"https://en.wikipedia.org/wiki/X", std::nullopt, 1}};
    CHECK(f.fetch_all(rs, log).empty());
    CHECK(inner->calls() == 0);
    CHECK(log.size() == 1);
}

TEST_CASE("external selection filters paragraphs like internal strips") {
    std::vector<PageContent> pages{{"u1", {"good", "bad", " "}}, {"u2", {"ok"}}};
    TableScorer scorer({{"good", 0.9}, {"bad", -0.9}, {"ok", 0.0}});
    const auto b = select_external(QueryText("q"), pages, scorer, RefineConfig{});
    CHECK(b.kind == KnowledgeKind::External);
    CHECK(b.text == "good\nok");
    CHECK(b.strips[1].doc_id == "u2");
    CHECK(select_external(QueryText("q"), std::vector<PageContent>{}, scorer, RefineConfig{}).text.empty());
    CHECK(all_paragraphs(pages).text == "good\nbad\nok");
}
