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

#include "crag/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "crag/error.hpp"

namespace crag::config {

using nlohmann::json;

namespace {

const json* find_path(const json& root, std::string_view dotted) {
    const json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string part(dotted.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (!node->is_object() || !node->contains(part)) return nullptr;
        node = &(*node)[part];
        if (dot == std::string_view::npos) return node;
        start = dot + 1;
    }
}

void collect_keys(const json& node, const std::string& prefix, std::vector<std::string>& out) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) {
            collect_keys(*it, key, out);
        } else {
            out.push_back(key);
        }
    }
}

void check_known(const json& layer) {
    if (!layer.is_object()) throw ConfigError("config must be a JSON object");
    std::vector<std::string> keys;
    collect_keys(layer, "", keys);
    const auto& known = known_keys();
    for (const auto& k : keys) {
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
    }
}

template <class T>
std::optional<T> get(const json& layer, std::string_view key) {
    const json* v = find_path(layer, key);
    if (!v) return std::nullopt;
    try {
        return v->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
    }
}

// Present-and-null clears an optional; absent leaves it alone.
void apply_optional_string(const json& layer, std::string_view key, std::optional<std::string>& field) {
    const json* v = find_path(layer, key);
    if (!v) return;
    if (v->is_null()) {
        field.reset();
    } else if (v->is_string()) {
        field = v->get<std::string>();
    } else {
        throw ConfigError("config key '" + std::string(key) + "' must be a string or null");
    }
}

void apply_optional_action(const json& layer, std::string_view key, std::optional<Action>& field) {
    std::optional<std::string> raw = field ? std::optional<std::string>(std::string(to_string(*field))) : std::nullopt;
    apply_optional_string(layer, key, raw);
    if (!raw) {
        field.reset();
        return;
    }
    auto a = parse_action(*raw);
    if (!a) throw ConfigError("config key '" + std::string(key) + "': unknown action '" + *raw + "'");
    field = a;
}

template <class T>
void apply(const json& layer, std::string_view key, T& field) {
    if (auto v = get<T>(layer, key)) field = *v;
}

void apply_ms(const json& layer, std::string_view key, std::chrono::milliseconds& field) {
    if (auto v = get<long long>(layer, key)) field = std::chrono::milliseconds(*v);
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "thresholds.preset",     "thresholds.upper",        "thresholds.lower",
        "refine.strip_sentences", "refine.top_k",           "refine.strip_threshold",
        "search.endpoint",       "search.top_k_urls",       "search.prefer_wikipedia",
        "search.fetch_timeout_ms", "search.cache_dir",      "search.retries",
        "search.max_concurrent_fetches", "search.api_key_env",
        "scorer.kind",           "scorer.endpoint",         "scorer.timeout_ms",
        "scorer.retries",        "scorer.max_in_flight",    "scorer.prompt",
        "generator.endpoint",    "generator.max_tokens",    "generator.timeout_ms",
        "generator.retries",
        "rewriter.endpoint",     "rewriter.timeout_ms",     "rewriter.retries",
        "ablations.disable_action", "ablations.only_action", "ablations.no_refinement",
        "ablations.no_rewriting", "ablations.no_selection",
        "workers",               "offline",
    };
    return keys;
}

json load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    check_known(j);
    return j;
}

void set_key(json& layer, std::string_view dotted_key, json value) {
    const auto& known = known_keys();
    if (std::find(known.begin(), known.end(), dotted_key) == known.end())
        throw ConfigError("unknown config key '" + std::string(dotted_key) + "'");
    json* node = &layer;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted_key.find('.', start);
        const std::string part(
            dotted_key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (dot == std::string_view::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

void add_override(json& layer, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ConfigError("override must look like key=value: " + std::string(assignment));
    const auto key = assignment.substr(0, eq);
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded() || value.is_object() || value.is_array()) value = raw;
    set_key(layer, key, std::move(value));
}

PipelineConfig build(const std::vector<json>& layers) {
    PipelineConfig cfg;
    double upper = cfg.thresholds.upper();
    double lower = cfg.thresholds.lower();

    for (const auto& layer : layers) {
        if (layer.is_null()) continue;
        check_known(layer);

        if (const json* p = find_path(layer, "thresholds.preset")) {
            if (p->is_null()) {
                cfg.threshold_preset.reset();
            } else {
                if (!p->is_string()) throw ConfigError("thresholds.preset must be a string");
                const auto name = p->get<std::string>();
                auto preset = Thresholds::preset(name);
                if (!preset) throw ConfigError("unknown threshold preset '" + name + "'");
                cfg.threshold_preset = name;
                upper = preset->upper();
                lower = preset->lower();
            }
        }
        auto explicit_upper = get<double>(layer, "thresholds.upper");
        auto explicit_lower = get<double>(layer, "thresholds.lower");
        if (explicit_upper) upper = *explicit_upper;
        if (explicit_lower) lower = *explicit_lower;
        if ((explicit_upper || explicit_lower) && !find_path(layer, "thresholds.preset")) cfg.threshold_preset.reset();

        apply(layer, "refine.strip_sentences", cfg.refine.strip_sentences);
        apply(layer, "refine.top_k", cfg.refine.top_k);
        apply(layer, "refine.strip_threshold", cfg.refine.strip_threshold);

        apply_optional_string(layer, "search.endpoint", cfg.search.endpoint);
        apply(layer, "search.top_k_urls", cfg.search.top_k_urls);
        apply(layer, "search.prefer_wikipedia", cfg.search.prefer_wikipedia);
        apply_ms(layer, "search.fetch_timeout_ms", cfg.search.fetch_timeout);
        if (auto dir = get<std::string>(layer, "search.cache_dir")) cfg.search.cache_dir = *dir;
        apply(layer, "search.retries", cfg.search.retries);
        apply(layer, "search.max_concurrent_fetches", cfg.search.max_concurrent_fetches);
        apply(layer, "search.api_key_env", cfg.search.api_key_env);

        if (auto kind = get<std::string>(layer, "scorer.kind")) {
            if (*kind == "lexical") {
                cfg.scorer.kind = ScorerConfig::Kind::Lexical;
            } else if (*kind == "remote") {
                cfg.scorer.kind = ScorerConfig::Kind::Remote;
            } else {
                throw ConfigError("scorer.kind must be 'lexical' or 'remote'");
            }
        }
        apply_optional_string(layer, "scorer.endpoint", cfg.scorer.endpoint);
        apply_ms(layer, "scorer.timeout_ms", cfg.scorer.timeout);
        apply(layer, "scorer.retries", cfg.scorer.retries);
        apply(layer, "scorer.max_in_flight", cfg.scorer.max_in_flight);
        if (const json* p = find_path(layer, "scorer.prompt")) {
            if (p->is_null()) {
                cfg.scorer.prompt.reset();
            } else {
                auto parsed = p->is_string() ? parse_evaluator_prompt(p->get<std::string>()) : std::nullopt;
                if (!parsed) throw ConfigError("scorer.prompt must be one of direct, cot, few_shot");
                cfg.scorer.prompt = parsed;
            }
        }

        apply_optional_string(layer, "generator.endpoint", cfg.generator.endpoint);
        apply(layer, "generator.max_tokens", cfg.generator.max_tokens);
        apply_ms(layer, "generator.timeout_ms", cfg.generator.timeout);
        apply(layer, "generator.retries", cfg.generator.retries);

        apply_optional_string(layer, "rewriter.endpoint", cfg.rewriter.endpoint);
        apply_ms(layer, "rewriter.timeout_ms", cfg.rewriter.timeout);
        apply(layer, "rewriter.retries", cfg.rewriter.retries);

        apply_optional_action(layer, "ablations.disable_action", cfg.ablations.disable_action);
        apply_optional_action(layer, "ablations.only_action", cfg.ablations.only_action);
        apply(layer, "ablations.no_refinement", cfg.ablations.no_refinement);
        apply(layer, "ablations.no_rewriting", cfg.ablations.no_rewriting);
        apply(layer, "ablations.no_selection", cfg.ablations.no_selection);

        apply(layer, "workers", cfg.workers);
        apply(layer, "offline", cfg.offline);
    }

    try {
        cfg.thresholds = Thresholds(upper, lower);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load(const std::optional<std::filesystem::path>& path, const json& overrides) {
    std::vector<json> layers;
    if (path) layers.push_back(load_file(*path));
    if (!overrides.is_null()) layers.push_back(overrides);
    return build(layers);
}

json to_json(const PipelineConfig& cfg) {
    auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
    auto opt_action = [](const std::optional<Action>& a) { return a ? json(std::string(to_string(*a))) : json(nullptr); };
    json prompt = nullptr;
    if (cfg.scorer.prompt) {
        switch (*cfg.scorer.prompt) {
            case EvaluatorPrompt::Direct: prompt = "direct"; break;
            case EvaluatorPrompt::ChainOfThought: prompt = "cot"; break;
            case EvaluatorPrompt::FewShot: prompt = "few_shot"; break;
        }
    }
    return json{
        {"thresholds", {{"preset", opt(cfg.threshold_preset)}, {"upper", cfg.thresholds.upper()}, {"lower", cfg.thresholds.lower()}}},
        {"refine", {{"strip_sentences", cfg.refine.strip_sentences}, {"top_k", cfg.refine.top_k}, {"strip_threshold", cfg.refine.strip_threshold}}},
        {"search",
         {{"endpoint", opt(cfg.search.endpoint)},
          {"top_k_urls", cfg.search.top_k_urls},
          {"prefer_wikipedia", cfg.search.prefer_wikipedia},
          {"fetch_timeout_ms", cfg.search.fetch_timeout.count()},
          {"cache_dir", cfg.search.cache_dir.string()},
          {"retries", cfg.search.retries},
          {"max_concurrent_fetches", cfg.search.max_concurrent_fetches},
          {"api_key_env", cfg.search.api_key_env}}},
        {"scorer",
         {{"kind", cfg.scorer.kind == ScorerConfig::Kind::Lexical ? "lexical" : "remote"},
          {"endpoint", opt(cfg.scorer.endpoint)},
          {"timeout_ms", cfg.scorer.timeout.count()},
          {"retries", cfg.scorer.retries},
          {"max_in_flight", cfg.scorer.max_in_flight},
          {"prompt", prompt}}},
        {"generator",
         {{"endpoint", opt(cfg.generator.endpoint)},
          {"max_tokens", cfg.generator.max_tokens},
          {"timeout_ms", cfg.generator.timeout.count()},
          {"retries", cfg.generator.retries}}},
        {"rewriter",
         {{"endpoint", opt(cfg.rewriter.endpoint)},
          {"timeout_ms", cfg.rewriter.timeout.count()},
          {"retries", cfg.rewriter.retries}}},
        {"ablations",
         {{"disable_action", opt_action(cfg.ablations.disable_action)},
          {"only_action", opt_action(cfg.ablations.only_action)},
          {"no_refinement", cfg.ablations.no_refinement},
          {"no_rewriting", cfg.ablations.no_rewriting},
          {"no_selection", cfg.ablations.no_selection}}},
        {"workers", cfg.workers},
        {"offline", cfg.offline},
    };
}

}  // namespace crag::config
