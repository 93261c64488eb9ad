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
#include <cctype>

#include "crag/error.hpp"
#include "crag/text.hpp"
#include "crag/websearch.hpp"

namespace crag {

SearchQuery::SearchQuery(std::vector<std::string> keywords) : keywords_(std::move(keywords)) {
    if (keywords_.empty()) throw InvalidArgument("search query needs at least one keyword");
    if (keywords_.size() > kMaxKeywords) throw InvalidArgument("search query allows at most three keywords");
    for (const auto& k : keywords_) {
        if (text::is_blank(k)) throw InvalidArgument("search keyword is blank");
    }
}

std::string SearchQuery::joined() const {
    std::string out;
    for (const auto& k : keywords_) {
        if (!out.empty()) out += ' ';
        out += k;
    }
    return out;
}

namespace {

constexpr std::string_view kRewritePrompt =
    "Extract at most three keywords separated by comma from the following dialogues and questions as queries "
    "for the web search, including topic background within dialogues and main intent within questions.\n"
    "\n"
    "question: What is Henry Feilden's occupation?\n"
    "query: Henry Feilden, occupation\n"
    "\n"
    "question: In what city was Billy Carlson born?\n"
    "query: city, Billy Carlson, born\n"
    "\n"
    "question: What is the religion of John Gwynn?\n"
    "query: religion of John Gwynn\n"
    "\n"
    "question: What sport does Kiribati men's national basketball team play?\n"
    "query: sport, Kiribati men's national basketball team play\n"
    "\n"
    "question: [question]\n"
    "query:";

// NLTK English stopwords, plus "whose".
constexpr std::string_view kStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll",
    "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's",
    "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs",
    "themselves", "what", "which", "who", "whom", "this", "that", "that'll", "these", "those", "am", "is",
    "are", "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does", "did",
    "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at",
    "by", "for", "with", "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
    "further", "then", "once", "here", "there", "when", "where", "why", "how", "all", "any", "both",
    "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same",
    "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've",
    "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't",
    "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
    "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't", "whose",
};

bool is_edge_punct(unsigned char c) { return c < 0x80 && !std::isalnum(c); }

struct Word {
    std::string text;
    bool breaks_after = false;  // clause punctuation or a possessive ends a name run
};

std::vector<Word> split_words(std::string_view question) {
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < question.size()) {
        while (i < question.size() && std::isspace(static_cast<unsigned char>(question[i]))) ++i;
        std::size_t j = i;
        while (j < question.size() && !std::isspace(static_cast<unsigned char>(question[j]))) ++j;
        std::string_view raw = question.substr(i, j - i);
        i = j;

        Word w;
        while (!raw.empty() && is_edge_punct(static_cast<unsigned char>(raw.back()))) {
            const char c = raw.back();
            if (c == ',' || c == ';' || c == ':' || c == '.' || c == '?' || c == '!' || c == ')') w.breaks_after = true;
            raw.remove_suffix(1);
        }
        while (!raw.empty() && is_edge_punct(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
        std::string s(raw);
        for (std::string_view suffix : {"'s", "\xE2\x80\x99s"}) {
            if (s.size() > suffix.size() && s.ends_with(suffix)) {
                s.resize(s.size() - suffix.size());
                w.breaks_after = true;
                break;
            }
        }
        if (s.empty()) {
            if (!words.empty() && w.breaks_after) words.back().breaks_after = true;
            continue;
        }
        w.text = std::move(s);
        words.push_back(std::move(w));
    }
    return words;
}

}  // namespace

std::string_view rewrite_prompt_template() { return kRewritePrompt; }

std::string render_rewrite_prompt(std::string_view question) {
    std::string out(kRewritePrompt);
    const std::string marker = "[question]";
    out.replace(out.find(marker), marker.size(), question);
    return out;
}

SearchQuery parse_rewrite_reply(std::string_view reply) {
    std::string line;
    const auto lower = text::to_lower(reply);
    if (auto pos = lower.rfind("query:"); pos != std::string::npos) {
        auto rest = reply.substr(pos + 6);
        line = std::string(rest.substr(0, rest.find('\n')));
    } else {
        for (const auto& l : text::split_lines(reply)) {
            if (!text::is_blank(l)) {
                line = l;
                break;
            }
        }
    }
    std::vector<std::string> keywords;
    std::size_t start = 0;
    while (start <= line.size()) {
        auto comma = line.find(',', start);
        auto piece = text::collapse_whitespace(
            std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!piece.empty() && keywords.size() < SearchQuery::kMaxKeywords) keywords.push_back(std::move(piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (keywords.empty()) throw InvalidArgument("rewriter reply has no keywords");
    return SearchQuery(std::move(keywords));
}

bool is_stopword(std::string_view w) {
    return std::find(std::begin(kStopwords), std::end(kStopwords), w) != std::end(kStopwords);
}

SearchQuery KeywordRewriter::rewrite(const QueryText& question, RunLog&) const {
    std::vector<std::string> keywords;
    bool run_open = false;  // last keyword is a capitalized run that may continue
    for (const auto& w : split_words(question.str())) {
        if (is_stopword(text::to_lower(w.text))) {
            run_open = false;
            continue;
        }
        const bool capitalized = std::isupper(static_cast<unsigned char>(w.text.front()));
        if (capitalized && run_open) {
            keywords.back() += ' ' + w.text;
        } else {
            keywords.push_back(w.text);
        }
        run_open = capitalized && !w.breaks_after;
    }

    std::vector<std::string> unique;
    for (auto& k : keywords) {
        const auto lk = text::to_lower(k);
        if (std::none_of(unique.begin(), unique.end(), [&](const std::string& u) { return text::to_lower(u) == lk; }))
            unique.push_back(std::move(k));
        if (unique.size() == SearchQuery::kMaxKeywords) break;
    }
    if (unique.empty()) {
        auto whole = text::collapse_whitespace(question.str());
        while (!whole.empty() && is_edge_punct(static_cast<unsigned char>(whole.back()))) whole.pop_back();
        unique.push_back(whole.empty() ? question.str() : whole);
    }
    return SearchQuery(std::move(unique));
}

LlmRewriter::LlmRewriter(std::string endpoint, std::shared_ptr<http::Transport> transport,
                         std::chrono::milliseconds timeout, int retries)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), timeout_(timeout), retries_(retries) {}

SearchQuery LlmRewriter::rewrite(const QueryText& question, RunLog& log) const {
    try {
        nlohmann::json body{{"prompt", render_rewrite_prompt(question.str())}, {"max_tokens", 32}};
        const auto reply = http::post_json(*transport_, endpoint_, body.dump(), timeout_, retries_);
        auto parsed = nlohmann::json::parse(reply);
        return parse_rewrite_reply(parsed.at("text").get<std::string>());
    } catch (const std::exception& e) {
        log.push_back(std::string("rewriter fallback: ") + e.what());
        return fallback_.rewrite(question, log);
    }
}

}  // namespace crag
