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

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crag::http {

struct Request {
    std::string method = "GET";
    std::string url;
    std::string body;
    std::string content_type = "application/json";
    std::vector<std::pair<std::string, std::string>> headers;
    std::chrono::milliseconds timeout{10'000};
};

struct Response {
    int status = 0;
    std::string body;
    std::string content_type;
};

struct Url {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string target;  // path plus query, always starts with '/'

    std::string origin() const;
    std::string path() const;
    std::string query() const;
};

/// Parses an absolute http(s) URL. Throws InvalidArgument on anything else.
Url parse_url(std::string_view url);
bool is_absolute_url(std::string_view url);

std::string url_encode(std::string_view s);
std::string url_decode(std::string_view s);

/// Value of `key` in an `a=b&c=d` query string, decoded. Empty if absent.
std::string query_param(std::string_view query, std::string_view key);

bool is_loopback_host(std::string_view host);

/// One HTTP exchange. Implementations throw TransportError when no reply
/// could be obtained; any reply (including 4xx/5xx) is returned as-is.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Response send(const Request& req) = 0;
};

/// Real network transport backed by cpp-httplib.
class NetworkTransport final : public Transport {
public:
    Response send(const Request& req) override;
};

/// Routes every request to an in-process handler. Counts calls.
class HandlerTransport final : public Transport {
public:
    using Handler = std::function<Response(const Request&)>;
    explicit HandlerTransport(Handler h) : handler_(std::move(h)) {}

    Response send(const Request& req) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    Handler handler_;
    std::atomic<std::size_t> calls_{0};
};

/// Rejects requests whose host is not loopback, then forwards.
class OfflineGuard final : public Transport {
public:
    explicit OfflineGuard(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}
    Response send(const Request& req) override;

private:
    std::shared_ptr<Transport> inner_;
};

/// Sends `req`, retrying up to `retries` extra times on transport failure,
/// 429, or 5xx. Returns the first 2xx reply; throws TransportError otherwise.
Response send_with_retries(Transport& t, const Request& req, int retries);

/// POST a JSON body and return the reply body of a 2xx response.
std::string post_json(Transport& t, const std::string& url, const std::string& body,
                      std::chrono::milliseconds timeout, int retries);

}  // namespace crag::http
