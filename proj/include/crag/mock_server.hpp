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

#include <filesystem>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "crag/http.hpp"

namespace httplib {
class Server;
}

namespace crag::mock {

struct MockPage {
    std::string path;  // e.g. "/wiki/Paris"
    std::string title;
    std::string body;
    std::string content_type = "text/html; charset=utf-8";
};

enum class GenerateMode { Stub, EchoLength, Fixed };

/// Canned responses for the search, page, generate and score routes.
///
/// Fixture directory layout:
///   pages.json     [{"path", "title", "file", "content_type"?}, ...]
///   search.json    {"queries": {"<q>": [{"url", "title"}, ...]}}   (optional)
///   generate.json  {"mode": "stub" | "echo_length" | "fixed", "text"?} (optional)
/// Page files are resolved relative to the fixture directory. "{base}" in
/// canned search URLs expands to the server's base URL.
struct MockData {
    std::vector<MockPage> pages;
    std::vector<std::pair<std::string, std::string>> canned_search;  // query -> JSON result list
    GenerateMode generate_mode = GenerateMode::Stub;
    std::string fixed_text;

    static MockData from_directory(const std::filesystem::path& dir);
};

/// Routes:
///   GET  /search?q=...   {"results": [{"url","title"}]}; canned entry for an
///                        exact query, else pages ranked by token overlap
///   GET  <page path>     the page body
///   POST /generate       {"prompt","max_tokens"} -> {"text"}
///   POST /score          {"query","document"} -> {"score"} (lexical)
///   anything else        404
class MockBackend {
public:
    explicit MockBackend(MockData data, std::string base_url = "http://127.0.0.1");

    const std::string& base_url() const noexcept { return base_url_; }
    void set_base_url(std::string base) { base_url_ = std::move(base); }

    http::Response handle(const std::string& method, const std::string& path, const std::string& query,
                          const std::string& body) const;
    /// Convenience for in-process transports: splits `req.url`.
    http::Response handle(const http::Request& req) const;

    std::size_t page_count() const noexcept { return data_.pages.size(); }

private:
    http::Response search(const std::string& q) const;
    http::Response generate(const std::string& body) const;
    http::Response score(const std::string& body) const;

    MockData data_;
    std::string base_url_;
    std::vector<std::string> page_text_;  // title plus extracted paragraphs, for ranking
};

/// Serves a MockBackend over HTTP on a background thread. Port 0 picks a
/// free port. Throws TransportError if the port cannot be bound.
class MockServer {
public:
    MockServer(std::shared_ptr<MockBackend> backend, const std::string& host = "127.0.0.1", int port = 0);
    ~MockServer();
    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    int port() const noexcept { return port_; }
    std::string base_url() const;
    void stop();
    /// Blocks until stop() is called from elsewhere.
    void wait();

private:
    std::shared_ptr<MockBackend> backend_;
    std::unique_ptr<httplib::Server> server_;
    std::string host_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace crag::mock
