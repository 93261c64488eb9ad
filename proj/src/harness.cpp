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

#include "crag/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "crag/config.hpp"
#include "crag/error.hpp"
#include "crag/parallel.hpp"
#include "crag/text.hpp"

namespace crag::harness {

using nlohmann::json;

namespace {

std::string require_string(const json& obj, const char* field, std::size_t line, bool non_empty = true) {
    if (!obj.contains(field)) throw ParseError(std::string("missing field \"") + field + "\"", line);
    if (!obj[field].is_string()) throw ParseError(std::string("field \"") + field + "\" must be a string", line);
    auto s = obj[field].get<std::string>();
    if (non_empty && text::is_blank(s)) throw ParseError(std::string("field \"") + field + "\" is empty", line);
    return s;
}

std::vector<std::string> require_strings(const json& obj, const char* field, std::size_t line) {
    if (!obj.contains(field)) throw ParseError(std::string("missing field \"") + field + "\"", line);
    if (!obj[field].is_array()) throw ParseError(std::string("field \"") + field + "\" must be an array", line);
    std::vector<std::string> out;
    for (const auto& v : obj[field]) {
        if (!v.is_string()) throw ParseError(std::string("field \"") + field + "\" must hold strings", line);
        out.push_back(v.get<std::string>());
    }
    return out;
}

DocumentText parse_document(const json& d, std::size_t line, std::string fallback_id) {
    if (!d.is_object()) throw ParseError("document must be an object", line);
    DocumentText doc;
    doc.id = d.contains("id") ? require_string(d, "id", line) : std::move(fallback_id);
    if (d.contains("title") && !d["title"].is_null()) doc.title = require_string(d, "title", line, false);
    doc.text = require_string(d, "text", line, false);
    return doc;
}

json parse_line(const std::string& raw, std::size_t line) {
    json j = json::parse(raw, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON", line);
    if (!j.is_object()) throw ParseError("expected a JSON object", line);
    return j;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<DatasetInstance> parse_dataset(std::istream& in) {
    std::vector<DatasetInstance> out;
    std::set<std::string> seen;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (text::is_blank(raw)) continue;
        const json j = parse_line(raw, line);

        DatasetInstance inst;
        inst.id = require_string(j, "id", line);
        inst.question = require_string(j, "question", line);
        inst.answers = require_strings(j, "answers", line);
        if (inst.answers.empty()) throw ParseError("field \"answers\" is empty", line);
        if (std::any_of(inst.answers.begin(), inst.answers.end(), [](const auto& a) { return text::is_blank(a); }))
            throw ParseError("field \"answers\" holds an empty answer", line);

        if (!j.contains("docs")) throw ParseError("missing field \"docs\"", line);
        if (!j["docs"].is_array()) throw ParseError("field \"docs\" must be an array", line);
        std::set<std::string> doc_ids;
        for (const auto& d : j["docs"]) {
            auto doc = parse_document(d, line, "d" + std::to_string(inst.docs.size() + 1));
            if (!doc_ids.insert(doc.id).second) throw ParseError("duplicate document id '" + doc.id + "'", line);
            inst.docs.push_back(std::move(doc));
        }
        if (j.contains("relevant_doc_ids") && !j["relevant_doc_ids"].is_null())
            inst.relevant_doc_ids = require_strings(j, "relevant_doc_ids", line);

        if (!seen.insert(inst.id).second) throw ParseError("duplicate instance id '" + inst.id + "'", line);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<DatasetInstance> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset " + path.string(), 0);
    return parse_dataset(in);
}

json to_json(const DatasetInstance& inst) {
    json docs = json::array();
    for (const auto& d : inst.docs) {
        json jd{{"id", d.id}, {"text", d.text}};
        if (d.title) jd["title"] = *d.title;
        docs.push_back(std::move(jd));
    }
    json j{{"id", inst.id}, {"question", inst.question}, {"answers", inst.answers}, {"docs", std::move(docs)}};
    if (inst.relevant_doc_ids) j["relevant_doc_ids"] = *inst.relevant_doc_ids;
    return j;
}

void write_dataset(std::ostream& out, std::span<const DatasetInstance> instances) {
    for (const auto& inst : instances) out << to_json(inst).dump() << '\n';
}

std::vector<DocumentText> parse_documents(std::istream& in) {
    std::vector<DocumentText> out;
    std::set<std::string> ids;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (text::is_blank(raw)) continue;
        auto doc = parse_document(parse_line(raw, line), line, "d" + std::to_string(line));
        if (!ids.insert(doc.id).second) throw ParseError("duplicate document id '" + doc.id + "'", line);
        out.push_back(std::move(doc));
    }
    return out;
}

double removal_draw(std::uint64_t seed, std::string_view instance_id, std::string_view doc_id) {
    std::uint64_t h = text::fnv1a64(std::to_string(seed));
    h = text::fnv1a64("\x1f", h);
    h = text::fnv1a64(instance_id, h);
    h = text::fnv1a64("\x1f", h);
    h = text::fnv1a64(doc_id, h);
    return static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
}

std::vector<DatasetInstance> degrade(std::span<const DatasetInstance> instances, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("degradation level must lie in [0, 1]");
    std::vector<DatasetInstance> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        if (!inst.relevant_doc_ids)
            throw InvalidArgument("instance '" + inst.id + "' has no relevance labels; cannot degrade");
        const auto& relevant = *inst.relevant_doc_ids;
        DatasetInstance copy = inst;
        std::erase_if(copy.docs, [&](const DocumentText& d) {
            const bool is_relevant = std::find(relevant.begin(), relevant.end(), d.id) != relevant.end();
            return is_relevant && removal_draw(seed, inst.id, d.id) < p;
        });
        if (copy.docs.empty())
            copy.docs.push_back(DocumentText{std::string(kPlaceholderId), std::nullopt, std::string(kPlaceholderText)});
        out.push_back(std::move(copy));
    }
    return out;
}

bool accuracy(std::string_view answer, std::span<const std::string> golds) {
    if (golds.empty()) throw InvalidArgument("no gold answers");
    return std::any_of(golds.begin(), golds.end(), [&](const std::string& g) { return text::icontains(answer, g); });
}

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::Crag: return "crag";
        case Mode::PlainRag: return "plain_rag";
        case Mode::RagWeb: return "rag_web";
    }
    return "crag";
}

std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "crag") return Mode::Crag;
    if (s == "plain_rag") return Mode::PlainRag;
    if (s == "rag_web") return Mode::RagWeb;
    return std::nullopt;
}

ExperimentReport run_experiment(std::span<const DatasetInstance> dataset, const PipelineConfig& cfg, Mode mode,
                                std::optional<Degradation> degradation, const PipelineDeps& deps) {
    cfg.validate();
    std::vector<DatasetInstance> degraded;
    std::span<const DatasetInstance> instances = dataset;
    if (degradation) {
        degraded = degrade(dataset, degradation->p, degradation->seed);
        instances = degraded;
    }

    ExperimentReport report;
    report.config = config::to_json(cfg);
    report.mode = mode;
    report.degradation = degradation;
    report.results.resize(instances.size());

    parallel_for(instances.size(), static_cast<std::size_t>(cfg.workers), [&](std::size_t i) {
        const auto& inst = instances[i];
        const QueryText q(inst.question);
        RunRecord rec = mode == Mode::Crag       ? run(q, inst.docs, cfg, deps)
                        : mode == Mode::PlainRag ? run_baseline(q, inst.docs, cfg, deps, BaselineMode::PlainRag)
                                                 : run_baseline(q, inst.docs, cfg, deps, BaselineMode::RagWithWeb);
        if (rec.status == RunStatus::ScorerUnavailable)
            throw ScorerUnavailable("instance '" + inst.id + "': " + rec.error);
        const bool correct = rec.status == RunStatus::Ok && accuracy(rec.answer, inst.answers);
        report.results[i] = InstanceResult{inst.id, std::move(rec), correct};
    });

    for (const auto& r : report.results) {
        if (r.correct) ++report.correct_count;
        if (r.record.action) ++report.action_histogram[*r.record.action];
    }
    report.accuracy = report.results.empty()
                          ? 0.0
                          : static_cast<double>(report.correct_count) / static_cast<double>(report.results.size());
    return report;
}

json to_json(const RunRecord& rec) {
    auto scores = [](std::span<const RelevanceScore> s) {
        json a = json::array();
        for (const auto& v : s) a.push_back(v.value());
        return a;
    };
    json strips = json::array();
    for (const auto& s : rec.knowledge.strips) {
        json js{{"doc_id", s.doc_id}, {"index", s.index}, {"text", s.text}};
        js["score"] = s.score ? json(s.score->value()) : json(nullptr);
        strips.push_back(std::move(js));
    }
    json j{
        {"question", rec.question},
        {"doc_scores", scores(rec.doc_scores)},
        {"action", rec.action ? json(std::string(to_string(*rec.action))) : json(nullptr)},
        {"knowledge", {{"kind", std::string(to_string(rec.knowledge.kind))}, {"text", rec.knowledge.text}, {"strips", strips}}},
        {"search_keywords", rec.search_keywords},
        {"searched_urls", rec.searched_urls},
        {"answer", rec.answer},
        {"status", std::string(to_string(rec.status))},
        {"log", rec.log},
        {"timings_ms",
         {{"score", rec.timings.score_ms},
          {"refine", rec.timings.refine_ms},
          {"search", rec.timings.search_ms},
          {"generate", rec.timings.generate_ms}}},
    };
    if (rec.judgment) {
        j["judgment"] = {{"action", std::string(to_string(rec.judgment->action))},
                         {"max_score", rec.judgment->max_score.value()},
                         {"scores", scores(rec.judgment->scores)}};
    } else {
        j["judgment"] = nullptr;
    }
    if (!rec.error.empty()) j["error"] = rec.error;
    return j;
}

json to_json(const ExperimentReport& report) {
    json histogram = json::object();
    for (const auto& [action, count] : report.action_histogram) histogram[std::string(to_string(action))] = count;
    json records = json::array();
    for (const auto& r : report.results) {
        json jr = to_json(r.record);
        jr["id"] = r.id;
        jr["correct"] = r.correct;
        records.push_back(std::move(jr));
    }
    json j{
        {"config", report.config},
        {"mode", std::string(to_string(report.mode))},
        {"degradation_level", report.degradation_level()},
        {"instance_count", report.results.size()},
        {"correct_count", report.correct_count},
        {"accuracy", report.accuracy},
        {"action_histogram", histogram},
        {"records", records},
    };
    j["degradation"] = report.degradation ? json{{"p", report.degradation->p}, {"seed", report.degradation->seed}} : json(nullptr);
    return j;
}

std::string csv_header() { return "mode,p,seed,instances,correct,accuracy,correct_action,incorrect_action,ambiguous_action"; }

std::string csv_row(const ExperimentReport& report) {
    auto count = [&](Action a) {
        auto it = report.action_histogram.find(a);
        return it == report.action_histogram.end() ? std::size_t{0} : it->second;
    };
    std::ostringstream os;
    os << to_string(report.mode) << ',' << report.degradation_level() << ','
       << (report.degradation ? std::to_string(report.degradation->seed) : std::string()) << ',' << report.results.size()
       << ',' << report.correct_count << ',' << report.accuracy << ',' << count(Action::Correct) << ','
       << count(Action::Incorrect) << ',' << count(Action::Ambiguous);
    return os.str();
}

}  // namespace crag::harness
