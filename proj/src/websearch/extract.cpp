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

#include <algorithm>
#include <cctype>
#include <cstdint>

#include "crag/text.hpp"
#include "crag/websearch.hpp"

namespace crag {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

struct NamedEntity {
    std::string_view name;
    std::uint32_t cp;
};

constexpr NamedEntity kEntities[] = {
    {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
    {"nbsp", 0xA0},    {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"lsquo", 0x2018},
    {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"copy", 0xA9},     {"reg", 0xAE},
    {"deg", 0xB0},     {"middot", 0xB7},  {"times", 0xD7},   {"eacute", 0xE9},  {"uuml", 0xFC},
};

bool starts_tag(std::string_view s, std::size_t i) {
    if (s[i] != '<' || i + 1 >= s.size()) return false;
    const unsigned char c = static_cast<unsigned char>(s[i + 1]);
    return std::isalpha(c) || c == '/' || c == '!' || c == '?';
}

bool is_inline_tag(std::string_view name) {
    static constexpr std::string_view kInline[] = {"a",    "abbr", "b",   "bdi",  "cite", "code", "em",
                                                   "font", "i",    "kbd", "mark", "q",    "s",    "small",
                                                   "span", "strong", "sub", "sup", "time", "u",   "var"};
    return std::find(std::begin(kInline), std::end(kInline), name) != std::end(kInline);
}

// Drops comments and the bodies of script/style elements.
std::string remove_non_content(std::string_view html) {
    const std::string low = text::to_lower(html);
    std::string out;
    out.reserve(html.size());
    std::size_t i = 0;
    while (i < html.size()) {
        if (low.compare(i, 4, "<!--") == 0) {
            auto end = low.find("-->", i + 4);
            i = end == std::string::npos ? html.size() : end + 3;
            continue;
        }
        bool skipped = false;
        for (std::string_view tag : {"script", "style"}) {
            if (html[i] == '<' && i + 1 + tag.size() < html.size() && low.compare(i + 1, tag.size(), tag) == 0) {
                const char after = low[i + 1 + tag.size()];
                if (after != '>' && !std::isspace(static_cast<unsigned char>(after)) && after != '/') continue;
                const std::string close = "</" + std::string(tag);
                auto end = low.find(close, i);
                if (end == std::string::npos) {
                    i = html.size();
                } else {
                    auto gt = low.find('>', end);
                    i = gt == std::string::npos ? html.size() : gt + 1;
                }
                out.push_back(' ');
                skipped = true;
                break;
            }
        }
        if (!skipped) out.push_back(html[i++]);
    }
    return out;
}

// Position of the next "<p>" / "<p ...>" opening tag at or after `from`.
std::size_t find_p_open(const std::string& low, std::size_t from) {
    for (auto pos = low.find("<p", from); pos != std::string::npos; pos = low.find("<p", pos + 2)) {
        if (pos + 2 >= low.size()) return std::string::npos;
        const char after = low[pos + 2];
        if (after == '>' || after == '/' || std::isspace(static_cast<unsigned char>(after))) return pos;
    }
    return std::string::npos;
}

std::size_t find_p_close(const std::string& low, std::size_t from) {
    for (auto pos = low.find("</p", from); pos != std::string::npos; pos = low.find("</p", pos + 3)) {
        if (pos + 3 >= low.size()) return std::string::npos;
        const char after = low[pos + 3];
        if (after == '>' || std::isspace(static_cast<unsigned char>(after))) return pos;
    }
    return std::string::npos;
}

std::string strip_tags(std::string_view frag) {
    std::string out;
    std::size_t i = 0;
    while (i < frag.size()) {
        if (!starts_tag(frag, i)) {
            out.push_back(frag[i++]);
            continue;
        }
        auto gt = frag.find('>', i);
        if (gt == std::string_view::npos) break;  // unterminated tag: drop the rest
        std::size_t n = i + 1;
        if (n < frag.size() && frag[n] == '/') ++n;
        std::size_t name_end = n;
        while (name_end < gt && std::isalnum(static_cast<unsigned char>(frag[name_end]))) ++name_end;
        if (!is_inline_tag(text::to_lower(frag.substr(n, name_end - n)))) out.push_back(' ');
        i = gt + 1;
    }
    return out;
}

std::string clean_paragraph(std::string_view frag) {
    auto decoded = decode_entities(strip_tags(frag));
    // U+00A0 from &nbsp; counts as whitespace here.
    for (auto pos = decoded.find("\xC2\xA0"); pos != std::string::npos; pos = decoded.find("\xC2\xA0", pos))
        decoded.replace(pos, 2, " ");
    return text::collapse_whitespace(decoded);
}

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(s[i++]);
            continue;
        }
        const auto name = s.substr(i + 1, semi - i - 1);
        bool decoded = false;
        if (name.size() > 1 && name[0] == '#') {
            std::uint32_t cp = 0;
            const bool hex = name[1] == 'x' || name[1] == 'X';
            const auto digits = name.substr(hex ? 2 : 1);
            bool ok = !digits.empty();
            for (char c : digits) {
                const unsigned char u = static_cast<unsigned char>(c);
                if (hex ? !std::isxdigit(u) : !std::isdigit(u)) {
                    ok = false;
                    break;
                }
                cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(std::isdigit(u) ? c - '0' : (std::tolower(u) - 'a' + 10));
                if (cp > 0x10FFFF) cp = 0x110000;
            }
            if (ok) {
                append_utf8(out, cp);
                decoded = true;
            }
        } else {
            for (const auto& e : kEntities) {
                if (e.name == name) {
                    append_utf8(out, e.cp);
                    decoded = true;
                    break;
                }
            }
        }
        if (decoded) {
            i = semi + 1;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::vector<std::string> extract_html_paragraphs(std::string_view html) {
    const std::string cleaned = remove_non_content(html);
    const std::string low = text::to_lower(cleaned);
    std::vector<std::string> out;
    std::size_t pos = find_p_open(low, 0);
    while (pos != std::string::npos) {
        const auto open_end = low.find('>', pos);
        if (open_end == std::string::npos) break;
        const std::size_t body = open_end + 1;
        const std::size_t next_open = find_p_open(low, body);
        std::size_t end = std::min({find_p_close(low, body), next_open, low.find("</body", body), low.size()});
        auto para = clean_paragraph(std::string_view(cleaned).substr(body, end - body));
        if (!para.empty()) out.push_back(std::move(para));
        pos = next_open;
    }
    return out;
}

std::vector<std::string> extract_text_blocks(std::string_view body) {
    std::vector<std::string> out;
    std::string block;
    auto flush = [&] {
        auto b = text::collapse_whitespace(block);
        if (!b.empty()) out.push_back(std::move(b));
        block.clear();
    };
    for (const auto& line : text::split_lines(body)) {
        if (text::is_blank(line)) {
            flush();
        } else {
            block += line;
            block += '\n';
        }
    }
    flush();
    return out;
}

bool looks_like_html(std::string_view body, std::string_view content_type) {
    if (text::icontains(content_type, "html")) return true;
    if (text::icontains(content_type, "text/plain")) return false;
    const auto head = text::to_lower(body.substr(0, 2048));
    return head.find("<html") != std::string::npos || head.find("<!doctype") != std::string::npos ||
           find_p_open(head, 0) != std::string::npos;
}

PageContent extract_page(std::string url, std::string_view body, std::string_view content_type) {
    PageContent page{std::move(url), {}};
    page.paragraphs = looks_like_html(body, content_type) ? extract_html_paragraphs(body) : extract_text_blocks(body);
    return page;
}

}  // namespace crag
