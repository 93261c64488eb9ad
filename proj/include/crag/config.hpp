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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crag/pipeline.hpp"

namespace crag::config {

/// Every accepted dotted key, e.g. "thresholds.upper", "search.endpoint".
const std::vector<std::string>& known_keys();

/// Reads a JSON config file. Throws ConfigError on I/O, syntax, or unknown keys.
nlohmann::json load_file(const std::filesystem::path& path);

/// Adds `key=value` to an override layer. The value is taken as JSON when it
/// parses (numbers, true/false, null, quoted strings), otherwise as a bare
/// string. Throws ConfigError for unknown keys or a missing '='.
void add_override(nlohmann::json& layer, std::string_view assignment);
void set_key(nlohmann::json& layer, std::string_view dotted_key, nlohmann::json value);

/// Builds a config from layers applied lowest to highest precedence. Within
/// a layer, a named threshold preset is applied before explicit upper/lower,
/// and replaces any thresholds from lower layers. Throws ConfigError.
PipelineConfig build(const std::vector<nlohmann::json>& layers);

/// Config file (optional) plus CLI override layer.
PipelineConfig load(const std::optional<std::filesystem::path>& path, const nlohmann::json& overrides);

/// Snapshot for reports; feeding it back through build() reproduces `cfg`.
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace crag::config
