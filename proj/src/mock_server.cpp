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

#include "crag/mock_server.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "crag/error.hpp"
#include "crag/pipeline.hpp"
#include "crag/scoring.hpp"
#include "crag/text.hpp"
#include "crag/websearch.hpp"

namespace crag::mock {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read fixture file " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::filesystem::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::parse_error& e) {
        throw ConfigError("fixture file " + p.string() + " is not valid JSON: " + e.what());
    }
}

http::Response json_reply(const json& j, int status = 200) { return {status, j.dump(), "application/json"}; }

http::Response not_found() { return {404, R"({"error":"not found"})", "application/json"}; }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

}  // namespace

MockData MockData::from_directory(const std::filesystem::path& dir) {
    MockData data;
    const auto pages = read_json(dir / "pages.json");
    if (!pages.is_array()) throw ConfigError("pages.json must be an array");
    for (const auto& p : pages) {
        MockPage page;
        page.path = p.at("path").get<std::string>();
        page.title = p.value("title", "");
        page.body = read_file(dir / p.at("file").get<std::string>());
        page.content_type = p.value("content_type", page.content_type);
        data.pages.push_back(std::move(page));
    }
    if (std::filesystem::exists(dir / "search.json")) {
        const auto s = read_json(dir / "search.json");
        for (const auto& [q, results] : s.value("queries", json::object()).items())
            data.canned_search.emplace_back(q, results.dump());
    }
    if (std::filesystem::exists(dir / "generate.json")) {
        const auto g = read_json(dir / "generate.json");
        const auto mode = g.value("mode", "stub");
        if (mode == "stub") {
            data.generate_mode = GenerateMode::Stub;
        } else if (mode == "echo_length") {
            data.generate_mode = GenerateMode::EchoLength;
        } else if (mode == "fixed") {
            data.generate_mode = GenerateMode::Fixed;
            data.fixed_text = g.value("text", "");
        } else {
            throw ConfigError("generate.json: unknown mode '" + mode + "'");
        }
    }
    return data;
}

MockBackend::MockBackend(MockData data, std::string base_url) : data_(std::move(data)), base_url_(std::move(base_url)) {
    for (const auto& p : data_.pages) {
        std::string all = p.title;
        for (const auto& para : extract_page(p.path, p.body, p.content_type).paragraphs) all += "\n" + para;
        page_text_.push_back(std::move(all));
    }
}

http::Response MockBackend::handle(const http::Request& req) const {
    const auto u = http::parse_url(req.url);
    return handle(req.method, u.path(), u.query(), req.body);
}

http::Response MockBackend::handle(const std::string& method, const std::string& path, const std::string& query,
                                   const std::string& body) const {
    if (method == "GET" && path == "/search") return search(http::query_param(query, "q"));
    if (method == "POST" && path == "/generate") return generate(body);
    if (method == "POST" && path == "/score") return score(body);
    if (method == "GET") {
        for (const auto& p : data_.pages) {
            if (p.path == path) return {200, p.body, p.content_type};
        }
    }
    return not_found();
}

http::Response MockBackend::search(const std::string& q) const {
    for (const auto& [query, results] : data_.canned_search) {
        if (query == q) {
            std::string expanded = results;
            replace_all(expanded, "{base}", base_url_);
            return json_reply(json{{"results", json::parse(expanded)}});
        }
    }
    std::vector<std::size_t> overlap(data_.pages.size());
    for (std::size_t i = 0; i < data_.pages.size(); ++i) overlap[i] = text::token_overlap(q, page_text_[i]);
    std::vector<std::size_t> order(data_.pages.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return overlap[a] > overlap[b]; });

    json results = json::array();
    for (std::size_t i : order) {
        if (overlap[i] == 0 || results.size() == 10) break;
        results.push_back({{"url", base_url_ + data_.pages[i].path}, {"title", data_.pages[i].title}});
    }
    return json_reply(json{{"results", results}});
}

http::Response MockBackend::generate(const std::string& body) const {
    const auto req = json::parse(body, nullptr, false);
    if (req.is_discarded() || !req.is_object() || !req.contains("prompt") || !req["prompt"].is_string())
        return json_reply(json{{"error", "expected {\"prompt\": string}"}}, 400);
    const auto prompt = req["prompt"].get<std::string>();
    switch (data_.generate_mode) {
        case GenerateMode::EchoLength: return json_reply(json{{"text", std::to_string(prompt.size())}});
        case GenerateMode::Fixed: return json_reply(json{{"text", data_.fixed_text}});
        case GenerateMode::Stub: break;
    }
    try {
        return json_reply(json{{"text", StubGenerator{}.generate(prompt)}});
    } catch (const Error& e) {
        return json_reply(json{{"error", e.what()}}, 400);
    }
}

http::Response MockBackend::score(const std::string& body) const {
    const auto req = json::parse(body, nullptr, false);
    if (req.is_discarded() || !req.is_object() || !req.contains("query") || !req["query"].is_string() ||
        !req.contains("document") || !req["document"].is_string())
        return json_reply(json{{"error", "expected {\"query\": string, \"document\": string}"}}, 400);
    try {
        const QueryText q(req["query"].get<std::string>());
        return json_reply(json{{"score", LexicalScorer{}.score_text(q, req["document"].get<std::string>()).value()}});
    } catch (const Error& e) {
        return json_reply(json{{"error", e.what()}}, 400);
    }
}

MockServer::MockServer(std::shared_ptr<MockBackend> backend, const std::string& host, int port)
    : backend_(std::move(backend)), server_(std::make_unique<httplib::Server>()), host_(host) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        std::string query;
        for (const auto& [k, v] : req.params) {
            if (!query.empty()) query += '&';
            query += http::url_encode(k) + "=" + http::url_encode(v);
        }
        const auto r = backend_->handle(req.method, req.path, query, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type.empty() ? "text/plain" : r.content_type);
    };
    // Default options include SO_REUSEPORT, which lets a second server share a busy port.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    server_->Get(".*", handler);
    server_->Post(".*", handler);

    if (port == 0) {
        port_ = server_->bind_to_any_port(host_);
    } else {
        port_ = server_->bind_to_port(host_, port) ? port : -1;
    }
    if (port_ <= 0) throw TransportError("cannot bind mock server to " + host_ + ":" + std::to_string(port));
    backend_->set_base_url(base_url());
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

MockServer::~MockServer() { stop(); }

std::string MockServer::base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

void MockServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

void MockServer::wait() {
    if (thread_.joinable()) thread_.join();
}

}  // namespace crag::mock
