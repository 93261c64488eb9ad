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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crag/scoring.hpp"

namespace crag {

enum class Action { Correct, Incorrect, Ambiguous };

std::string_view to_string(Action a);
/// Accepts "Correct"/"correct" etc.
std::optional<Action> parse_action(std::string_view s);

/// Upper and lower confidence thresholds; lower < upper, both within [-1, 1].
class Thresholds {
public:
    /// Throws InvalidArgument when the ordering or range invariant fails.
    Thresholds(double upper, double lower);

    double upper() const noexcept { return upper_; }
    double lower() const noexcept { return lower_; }
    bool operator==(const Thresholds&) const = default;

    static Thresholds popqa() { return {0.59, -0.99}; }
    static Thresholds pubhealth() { return {0.5, -0.91}; }
    static Thresholds arc_challenge() { return {0.5, -0.91}; }
    static Thresholds biography() { return {0.95, -0.91}; }

    /// "popqa", "pubhealth", "arc" / "arc_challenge", "biography" / "bio".
    static std::optional<Thresholds> preset(std::string_view name);

private:
    double upper_;
    double lower_;
};

struct ActionJudgment {
    Action action;
    RelevanceScore max_score;
    std::vector<RelevanceScore> scores;
};

/// Correct iff some score is strictly above upper, Incorrect iff every score is
/// strictly below lower, Ambiguous otherwise. Throws InvalidArgument on an
/// empty score list.
ActionJudgment judge(std::span<const RelevanceScore> scores, const Thresholds& t);

}  // namespace crag
