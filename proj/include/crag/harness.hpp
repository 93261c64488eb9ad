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

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crag/pipeline.hpp"

namespace crag::harness {

struct DatasetInstance {
    std::string id;
    std::string question;
    std::vector<std::string> answers;
    std::vector<DocumentText> docs;
    std::optional<std::vector<std::string>> relevant_doc_ids;

    bool operator==(const DatasetInstance&) const = default;
};

/// One instance per non-blank JSONL line. Throws ParseError carrying the
/// 1-based line number for malformed lines, missing fields, and duplicate ids.
std::vector<DatasetInstance> parse_dataset(std::istream& in);
std::vector<DatasetInstance> load_dataset(const std::filesystem::path& path);

/// Same JSONL encoding load_dataset reads; key order is fixed, so equal
/// datasets serialize to identical bytes.
void write_dataset(std::ostream& out, std::span<const DatasetInstance> instances);
nlohmann::json to_json(const DatasetInstance& inst);

/// Documents JSONL ({"id"?, "title"?, "text"} per line); missing ids become
/// "d1", "d2", ... by line. Throws ParseError.
std::vector<DocumentText> parse_documents(std::istream& in);

// ---------------------------------------------------------------------------
// Degradation

inline constexpr std::string_view kPlaceholderId = "placeholder";
inline constexpr std::string_view kPlaceholderText = "no information available";

/// Uniform draw in [0, 1) fixed by (seed, instance id, doc id). A relevant
/// document is removed at level p iff its draw is below p, so the removed set
/// at p1 is contained in the removed set at any p2 >= p1.
double removal_draw(std::uint64_t seed, std::string_view instance_id, std::string_view doc_id);

/// Removes each labelled-relevant document with probability p. Irrelevant
/// documents are untouched; an emptied instance receives a placeholder doc.
/// Throws InvalidArgument for p outside [0, 1] or an instance without labels.
std::vector<DatasetInstance> degrade(std::span<const DatasetInstance> instances, double p, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Metric and experiments

/// True iff some gold answer occurs in `answer`, ignoring ASCII case.
/// Throws InvalidArgument when `golds` is empty.
bool accuracy(std::string_view answer, std::span<const std::string> golds);

enum class Mode { Crag, PlainRag, RagWeb };
std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

struct Degradation {
    double p = 0.0;
    std::uint64_t seed = 0;
};

struct InstanceResult {
    std::string id;
    RunRecord record;
    bool correct = false;
};

struct ExperimentReport {
    nlohmann::json config;
    Mode mode = Mode::Crag;
    std::optional<Degradation> degradation;
    std::vector<InstanceResult> results;
    std::size_t correct_count = 0;
    double accuracy = 0.0;
    std::map<Action, std::size_t> action_histogram;

    double degradation_level() const { return degradation ? degradation->p : 0.0; }
};

/// Runs every instance (cfg.workers at a time), preserving input order in the
/// report. Degradation is applied up front. A scorer outage aborts the whole
/// experiment with ScorerUnavailable; generation failures count as incorrect.
ExperimentReport run_experiment(std::span<const DatasetInstance> dataset, const PipelineConfig& cfg, Mode mode,
                                std::optional<Degradation> degradation, const PipelineDeps& deps);

nlohmann::json to_json(const RunRecord& rec);
nlohmann::json to_json(const ExperimentReport& report);

/// One CSV row per report: mode, p, seed, accuracy, and per-action counts.
std::string csv_header();
std::string csv_row(const ExperimentReport& report);

}  // namespace crag::harness
