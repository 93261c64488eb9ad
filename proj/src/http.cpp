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

#include "crag/http.hpp"

#include <httplib.h>

#include <cctype>
#include <thread>

#include "crag/error.hpp"
#include "crag/text.hpp"

namespace crag::http {

std::string Url::origin() const {
    const bool default_port = (scheme == "http" && port == 80) || (scheme == "https" && port == 443);
    return scheme + "://" + host + (default_port ? "" : ":" + std::to_string(port));
}

std::string Url::path() const {
    auto q = target.find('?');
    return q == std::string::npos ? target : target.substr(0, q);
}

std::string Url::query() const {
    auto q = target.find('?');
    return q == std::string::npos ? std::string{} : target.substr(q + 1);
}

bool is_absolute_url(std::string_view url) {
    try {
        parse_url(url);
        return true;
    } catch (const InvalidArgument&) {
        return false;
    }
}

Url parse_url(std::string_view url) {
    Url u;
    auto sep = url.find("://");
    if (sep == std::string_view::npos) throw InvalidArgument("not an absolute URL: " + std::string(url));
    u.scheme = text::to_lower(url.substr(0, sep));
    if (u.scheme != "http" && u.scheme != "https")
        throw InvalidArgument("unsupported URL scheme: " + std::string(url));
    auto rest = url.substr(sep + 3);
    auto slash = rest.find_first_of("/?#");
    auto authority = rest.substr(0, slash);
    u.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    if (auto hash = u.target.find('#'); hash != std::string::npos) u.target.erase(hash);
    if (u.target.empty() || u.target[0] != '/') u.target.insert(u.target.begin(), '/');
    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);

    std::string_view host = authority;
    std::string_view port;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) throw InvalidArgument("bad IPv6 host in URL: " + std::string(url));
        host = authority.substr(1, close - 1);
        if (close + 1 < authority.size() && authority[close + 1] == ':') port = authority.substr(close + 2);
    } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = authority.substr(colon + 1);
    }
    if (host.empty()) throw InvalidArgument("URL has no host: " + std::string(url));
    u.host = text::to_lower(host);
    if (port.empty()) {
        u.port = u.scheme == "https" ? 443 : 80;
    } else {
        int p = 0;
        for (char c : port) {
            if (!std::isdigit(static_cast<unsigned char>(c))) throw InvalidArgument("bad port in URL: " + std::string(url));
            p = p * 10 + (c - '0');
            if (p > 65535) throw InvalidArgument("bad port in URL: " + std::string(url));
        }
        u.port = p;
    }
    return u;
}

std::string url_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::string url_decode(std::string_view s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out.push_back(' ');
        } else if (s[i] == '%' && i + 2 < s.size() && nibble(s[i + 1]) >= 0 && nibble(s[i + 2]) >= 0) {
            out.push_back(static_cast<char>(nibble(s[i + 1]) * 16 + nibble(s[i + 2])));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::string query_param(std::string_view query, std::string_view key) {
    std::size_t pos = 0;
    while (pos <= query.size()) {
        auto amp = query.find('&', pos);
        auto part = query.substr(pos, amp == std::string_view::npos ? std::string_view::npos : amp - pos);
        auto eq = part.find('=');
        if (url_decode(part.substr(0, eq)) == key)
            return eq == std::string_view::npos ? std::string{} : url_decode(part.substr(eq + 1));
        if (amp == std::string_view::npos) break;
        pos = amp + 1;
    }
    return {};
}

bool is_loopback_host(std::string_view host) {
    return host == "localhost" || host == "::1" || host.starts_with("127.");
}

Response NetworkTransport::send(const Request& req) {
    const Url u = parse_url(req.url);
    httplib::Client cli(u.origin());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(req.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    cli.set_follow_location(true);

    httplib::Headers headers;
    for (const auto& [k, v] : req.headers) headers.emplace(k, v);

    httplib::Result res;
    if (req.method == "GET") {
        res = cli.Get(u.target, headers);
    } else if (req.method == "POST") {
        res = cli.Post(u.target, headers, req.body, req.content_type);
    } else {
        throw InvalidArgument("unsupported HTTP method " + req.method);
    }
    if (!res) throw TransportError(req.method + " " + req.url + ": " + httplib::to_string(res.error()));
    return Response{res->status, res->body, res->get_header_value("Content-Type")};
}

Response HandlerTransport::send(const Request& req) {
    ++calls_;
    return handler_(req);
}

Response OfflineGuard::send(const Request& req) {
    const Url u = parse_url(req.url);
    if (!is_loopback_host(u.host)) throw OfflineViolation("offline mode forbids request to " + req.url);
    return inner_->send(req);
}

Response send_with_retries(Transport& t, const Request& req, int retries) {
    std::string last_error;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(25 * attempt));
        try {
            Response r = t.send(req);
            if (r.status >= 200 && r.status < 300) return r;
            last_error = req.method + " " + req.url + ": HTTP " + std::to_string(r.status);
            if (r.status != 429 && r.status < 500) break;
        } catch (const OfflineViolation&) {
            throw;
        } catch (const TransportError& e) {
            last_error = e.what();
        }
    }
    throw TransportError(last_error);
}

std::string post_json(Transport& t, const std::string& url, const std::string& body,
                      std::chrono::milliseconds timeout, int retries) {
    Request req;
    req.method = "POST";
    req.url = url;
    req.body = body;
    req.timeout = timeout;
    return send_with_retries(t, req, retries).body;
}

}  // namespace crag::http
