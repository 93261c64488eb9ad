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

#include "crag/trigger.hpp"

#include <algorithm>
#include <cmath>

#include "crag/error.hpp"
#include "crag/text.hpp"

namespace crag {

std::string_view to_string(Action a) {
    switch (a) {
        case Action::Correct: return "Correct";
        case Action::Incorrect: return "Incorrect";
        case Action::Ambiguous: return "Ambiguous";
    }
    return "Ambiguous";
}

std::optional<Action> parse_action(std::string_view s) {
    const auto l = text::to_lower(s);
    if (l == "correct") return Action::Correct;
    if (l == "incorrect") return Action::Incorrect;
    if (l == "ambiguous") return Action::Ambiguous;
    return std::nullopt;
}

Thresholds::Thresholds(double upper, double lower) : upper_(upper), lower_(lower) {
    if (std::isnan(upper) || std::isnan(lower) || lower < -1.0 || upper > 1.0 || !(lower < upper))
        throw InvalidArgument("thresholds must satisfy -1 <= lower < upper <= 1 (got upper=" +
                              std::to_string(upper) + ", lower=" + std::to_string(lower) + ")");
}

std::optional<Thresholds> Thresholds::preset(std::string_view name) {
    const auto l = text::to_lower(name);
    if (l == "popqa") return popqa();
    if (l == "pubhealth" || l == "pubqa") return pubhealth();
    if (l == "arc" || l == "arc_challenge" || l == "arc-challenge") return arc_challenge();
    if (l == "biography" || l == "bio") return biography();
    return std::nullopt;
}

ActionJudgment judge(std::span<const RelevanceScore> scores, const Thresholds& t) {
    if (scores.empty()) throw InvalidArgument("no documents to judge");
    const RelevanceScore best = *std::max_element(scores.begin(), scores.end());
    Action a = Action::Ambiguous;
    if (best.value() > t.upper())
        a = Action::Correct;
    else if (best.value() < t.lower())
        a = Action::Incorrect;
    return ActionJudgment{a, best, {scores.begin(), scores.end()}};
}

}  // namespace crag
