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

#include <stdexcept>
#include <string>

namespace crag {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: empty query, empty document set, invalid config value.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A dataset or docs file could not be parsed. `line()` is 1-based, 0 if unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Connection refused, timeout, or non-2xx reply after the transport gave up.
class TransportError : public Error {
public:
    using Error::Error;
};

/// A request was aimed at a non-loopback host while running offline.
class OfflineViolation : public TransportError {
public:
    using TransportError::TransportError;
};

class ScorerUnavailable : public Error {
public:
    using Error::Error;
};

class SearchUnavailable : public Error {
public:
    using Error::Error;
};

class FetchError : public Error {
public:
    FetchError(std::string url, const std::string& what)
        : Error("fetch " + url + ": " + what), url_(std::move(url)) {}
    const std::string& url() const noexcept { return url_; }

private:
    std::string url_;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace crag
