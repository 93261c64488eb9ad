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

#include "crag/error.hpp"
#include "crag/http.hpp"
#include "crag/text.hpp"

using namespace crag;

TEST_CASE("tokenize lowercases and splits on punctuation") {
    CHECK(text::tokenize("Henry Feilden's  occupation?") ==
          std::vector<std::string>{"henry", "feilden", "s", "occupation"});
    CHECK(text::tokenize("...").empty());
    CHECK(text::tokenize("Zürich 2024") == std::vector<std::string>{"z\xc3\xbcrich", "2024"});
}

TEST_CASE("unique tokens are sorted and deduplicated") {
    CHECK(text::unique_tokens("b a B a") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("whitespace helpers") {
    CHECK(text::trim("  a b \n") == "a b");
    CHECK(text::collapse_whitespace(" a \t\n b  ") == "a b");
    CHECK(text::is_blank(" \t\n"));
    CHECK_FALSE(text::is_blank(" x "));
    CHECK(text::split_lines("a\nb\r\n\nc") == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("icontains ignores ASCII case") {
    CHECK(text::icontains("The answer is PARIS.", "paris"));
    CHECK_FALSE(text::icontains("Par is", "paris"));
    CHECK(text::icontains("anything", ""));
}

TEST_CASE("token overlap counts distinct query tokens") {
    CHECK(text::token_overlap("the the cat", "The cat sat") == 2);
    CHECK(text::token_overlap("dog", "cat") == 0);
}

TEST_CASE("fnv1a64 matches the reference vectors") {
    CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(text::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("url parsing") {
    const auto u = http::parse_url("https://en.wikipedia.org/wiki/Paris?x=1");
    CHECK(u.scheme == "https");
    CHECK(u.host == "en.wikipedia.org");
    CHECK(u.port == 443);
    CHECK(u.path() == "/wiki/Paris");
    CHECK(u.query() == "x=1");
    CHECK(http::parse_url("http://127.0.0.1:8089").target == "/");
    CHECK_THROWS(http::parse_url("ftp://example.com/"));
    CHECK_FALSE(http::is_absolute_url("/relative"));
}

TEST_CASE("url encoding round-trips") {
    const std::string s = "capital France & co/ü";
    CHECK(http::url_decode(http::url_encode(s)) == s);
    CHECK(http::query_param("a=1&q=capital%20France", "q") == "capital France");
    CHECK(http::query_param("q=a+b", "q") == "a b");
    CHECK(http::query_param("a=1", "q").empty());
}

TEST_CASE("loopback hosts") {
    CHECK(http::is_loopback_host("127.0.0.1"));
    CHECK(http::is_loopback_host("localhost"));
    CHECK(http::is_loopback_host("::1"));
    CHECK_FALSE(http::is_loopback_host("example.com"));
}

TEST_CASE("offline guard blocks remote hosts before the inner transport") {
    auto inner = std::make_shared<http::HandlerTransport>([](const http::Request&) { return http::Response{200, "ok", ""}; });
    http::OfflineGuard guard(inner);
    CHECK_THROWS_AS(guard.send({"GET", "https://example.com/"}), OfflineViolation);
    CHECK(inner->calls() == 0);
    CHECK(guard.send({"GET", "http://127.0.0.1:1/"}).body == "ok");
    CHECK(inner->calls() == 1);
}

TEST_CASE("send_with_retries retries 5xx and stops at the first 2xx") {
    int n = 0;
    http::HandlerTransport t([&](const http::Request&) { return http::Response{++n < 3 ? 503 : 200, "x", ""}; });
    CHECK(http::send_with_retries(t, {"GET", "http://127.0.0.1/"}, 2).status == 200);
    CHECK(t.calls() == 3);

    http::HandlerTransport always_bad([](const http::Request&) { return http::Response{500, "", ""}; });
    CHECK_THROWS_AS(http::send_with_retries(always_bad, {"GET", "http://127.0.0.1/"}, 1), TransportError);
    CHECK(always_bad.calls() == 2);

    http::HandlerTransport not_found([](const http::Request&) { return http::Response{404, "", ""}; });
    CHECK_THROWS_AS(http::send_with_retries(not_found, {"GET", "http://127.0.0.1/"}, 3), TransportError);
    CHECK(not_found.calls() == 1);
}
