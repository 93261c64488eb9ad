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

// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "crag/cli.hpp"
#include "crag/config.hpp"
#include "crag/harness.hpp"
#include "crag/mock_server.hpp"
#include "crag/pipeline.hpp"
#include "support.hpp"

using namespace crag;
using namespace crag::testing;
using nlohmann::json;

namespace {

/// Collects the first failure message of a criterion.
struct Check {
    std::string failure;
    void operator()(bool ok, const std::string& what) {
        if (!ok && failure.empty()) failure = what;
    }
};

int failures = 0;

void criterion(int n, const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0) check(s < budget_s, "runtime over budget");
    const bool ok = check.failure.empty();
    if (!ok) ++failures;
    std::printf("%s  %d. %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", n, name.c_str(), s, ok ? "" : ": ",
                check.failure.c_str());
    std::fflush(stdout);
}

std::vector<RelevanceScore> to_scores(const std::vector<double>& v) {
    std::vector<RelevanceScore> out;
    for (double x : v) out.emplace_back(x);
    return out;
}

std::string dataset_bytes(const std::vector<harness::DatasetInstance>& ds) {
    std::ostringstream out;
    harness::write_dataset(out, ds);
    return out.str();
}

std::set<std::string> removed_docs(const std::vector<harness::DatasetInstance>& before,
                                   const std::vector<harness::DatasetInstance>& after) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < before.size(); ++i) {
        std::set<std::string> kept;
        for (const auto& d : after[i].docs) kept.insert(d.id);
        for (const auto& d : before[i].docs)
            if (!kept.count(d.id)) out.insert(before[i].id + "/" + d.id);
    }
    return out;
}

json histogram_via_cli(const mock::MockServer& server, const std::vector<std::string>& extra) {
    TempDir dir;
    const auto report = (dir.path / "report.json").string();
    std::vector<std::string> args{"crag",     "run",
                                  "--dataset", (fixture_dir() / "dataset.jsonl").string(),
                                  "--config",  (fixture_dir() / "config.json").string(),
                                  "--set",     "search.endpoint=" + server.base_url() + "/search",
                                  "--offline", "--out",
                                  report};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    if (cli::run(static_cast<int>(argv.size()), argv.data(), out, err) != 0)
        throw std::runtime_error("crag run failed: " + err.str());
    std::ifstream in(report);
    return json::parse(in)["action_histogram"];
}

std::size_t count_of(const json& hist, const char* action) { return hist.value(action, std::size_t{0}); }

}  // namespace

int main() {
    criterion(1, "trigger matches the brute-force rule and depends only on the max score", 5.0, [](Check& check) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const std::vector<double> grid{-1.0, -0.99, -0.91, 0.0, 0.5, 0.59, 0.95, 1.0};
        int done = 0;
        while (done < 10'000) {
            const double a = u(rng), b = u(rng);
            if (a == b) continue;
            ++done;
            const Thresholds t(std::max(a, b), std::min(a, b));
            std::vector<double> raw(1 + rng() % 10);
            for (auto& s : raw) s = rng() % 4 == 0 ? grid[rng() % grid.size()] : u(rng);
            if (rng() % 5 == 0) raw[rng() % raw.size()] = rng() % 2 ? t.upper() : t.lower();
            const auto scores = to_scores(raw);
            const auto j = judge(scores, t);
            check(j.action == trigger_oracle(raw, t.upper(), t.lower()), "judge disagrees with the oracle");
            const auto mx = *std::max_element(scores.begin(), scores.end());
            check(judge(std::vector{mx}, t).action == j.action, "judge(scores) != judge([max])");
        }
    });

    criterion(2, "filter_strips matches threshold, top-k, position re-sort", 5.0, [](Check& check) {
        std::mt19937 rng(2);
        const std::vector<double> levels{-1.0, -0.8, -0.6, -0.5, -0.3, 0.0, 0.2, 0.7, 1.0};
        int fallbacks = 0;
        for (int n = 0; n < 1000; ++n) {
            const std::size_t count = 1 + rng() % 15;
            std::vector<KnowledgeStrip> strips;
            std::map<std::string, double> table;
            std::vector<double> raw;
            const bool low_only = n % 5 == 0;
            for (std::size_t i = 0; i < count; ++i) {
                double s = levels[rng() % levels.size()];
                if (low_only) s = levels[rng() % 4];
                strips.push_back({"d" + std::to_string(i / 3), i % 3, "strip " + std::to_string(i), std::nullopt});
                table[strips.back().text] = s;
                raw.push_back(s);
            }
            RefineConfig cfg;
            cfg.top_k = 1 + static_cast<int>(rng() % 7);
            TableScorer scorer(table);
            const auto kept = filter_strips(QueryText("q"), strips, scorer, cfg);
            const auto expect = selection_oracle(raw, cfg.strip_threshold, static_cast<std::size_t>(cfg.top_k));
            bool same = kept.size() == expect.size();
            for (std::size_t i = 0; same && i < kept.size(); ++i) {
                same = kept[i].text == strips[expect[i]].text && kept[i].score &&
                       kept[i].score->value() == raw[expect[i]];
            }
            check(same, "selection differs from the oracle at case " + std::to_string(n));
            if (std::none_of(raw.begin(), raw.end(), [](double s) { return s > -0.5; })) ++fallbacks;
        }
        check(fallbacks > 100, "too few fallback cases exercised");
    });

    criterion(3, "segmentation reproduces the sentence sequence; <=2 sentences give one strip", 0, [](Check& check) {
        std::mt19937 rng(3);
        const std::vector<std::string> words{"river", "Paris", "3.14", "U.S", "old", "city"};
        for (int n = 0; n < 500; ++n) {
            const int count = 1 + static_cast<int>(rng() % 10);
            std::string doc;
            std::vector<std::string> written;
            for (int s = 0; s < count; ++s) {
                std::string sentence;
                for (int w = 0, k = 1 + static_cast<int>(rng() % 5); w < k; ++w)
                    sentence += (w ? " " : "") + words[rng() % words.size()];
                sentence += "!?."[rng() % 3];
                written.push_back(sentence);
                doc += sentence + (rng() % 3 ? " " : "\n\t ");
            }
            RefineConfig cfg;
            cfg.strip_sentences = 1 + static_cast<int>(rng() % 5);
            const auto strips = segment({"d", std::nullopt, doc}, cfg);
            std::vector<std::string> rebuilt;
            for (const auto& s : strips) {
                const auto part = split_sentences(s.text);
                rebuilt.insert(rebuilt.end(), part.begin(), part.end());
            }
            check(rebuilt == written, "round trip lost or reordered sentences");
            if (count <= 2) check(strips.size() == 1, "short document split into several strips");
        }
    });

    criterion(4, "Correct never searches, Incorrect never refines (50 random cases)", 0, [](Check& check) {
        std::mt19937 rng(4);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::set<Action> seen;
        for (int n = 0; n < 50; ++n) {
            Bench b;
            std::map<std::string, double> table;
            std::vector<double> raw;
            std::vector<DocumentText> docs;
            for (int i = 0, k = 1 + static_cast<int>(rng() % 6); i < k; ++i) {
                docs.push_back({"d" + std::to_string(i), std::nullopt, "text " + std::to_string(i) + "."});
                raw.push_back(u(rng));
                table[docs.back().text] = raw.back();
            }
            // Pin a third of the cases to each action.
            PipelineConfig cfg;
            const double mx = *std::max_element(raw.begin(), raw.end());
            switch (n % 3) {
                case 0: cfg.thresholds = Thresholds(std::max(mx - 0.01, -0.999), -1.0); break;
                case 1: cfg.thresholds = Thresholds(1.0, std::min(mx + 0.005, 0.99)); break;
                case 2: cfg.thresholds = Thresholds(std::min(mx + 0.005, 1.0), std::max(mx - 0.5, -1.0)); break;
            }
            b.scorer = std::make_unique<TableScorer>(table, 0.0);
            auto* search = new CountingSearch({{"http://127.0.0.1:1/p", std::nullopt, 1}});
            b.search.reset(search);
            b.transport = page_transport({{"http://127.0.0.1:1/p", "<p>web text</p>"}});
            const auto rec = run(QueryText("question?"), docs, cfg, b.deps());
            const auto expect = trigger_oracle(raw, cfg.thresholds.upper(), cfg.thresholds.lower());
            check(rec.action == expect, "executed action differs from the oracle");
            seen.insert(expect);
            if (expect == Action::Correct) check(search->calls() == 0, "Correct run called search");
            if (expect == Action::Incorrect) check(b.ops.refine_calls == 0, "Incorrect run called refine");
            if (expect != Action::Correct) check(search->calls() == 1, "search not called exactly once");
        }
        check(seen.size() == 3, "not every action was exercised");
    });

    criterion(5, "fixture end-to-end: crag holds 1.0 while plain_rag degrades", 30.0, [](Check& check) {
        for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const auto crag_report = run_fixture(harness::Mode::Crag, p);
            const auto plain = run_fixture(harness::Mode::PlainRag, p);
            const auto tag = " at p=" + std::to_string(p);
            check(crag_report.accuracy >= plain.accuracy, "crag below plain_rag" + tag);
            if (p == 0.0 || p == 1.0) check(crag_report.accuracy == 1.0, "crag accuracy not 1.0" + tag);
            if (p == 0.0) check(plain.accuracy == 1.0, "plain_rag accuracy not 1.0" + tag);
            if (p == 1.0) check(plain.accuracy == 0.0, "plain_rag accuracy not 0.0" + tag);
            check(crag_report.config["offline"] == true, "fixture run not offline");
        }
    });

    criterion(6, "ablation flags reshape the action histogram", 30.0, [](Check& check) {
        mock::MockServer server(
            std::make_shared<mock::MockBackend>(mock::MockData::from_directory(fixture_dir() / "mock")));
        const std::vector<std::string> mixed{"--degrade-p", "0.5", "--seed", "11"};
        auto with = [&](std::vector<std::string> a) {
            a.insert(a.end(), mixed.begin(), mixed.end());
            return histogram_via_cli(server, a);
        };
        const auto base = with({});
        check(count_of(base, "Correct") > 0 && count_of(base, "Incorrect") > 0, "baseline lacks a Correct/Incorrect mix");

        const auto no_correct = with({"--disable-action", "Correct"});
        check(count_of(no_correct, "Correct") == 0, "Correct survived --disable-action Correct");
        check(count_of(no_correct, "Ambiguous") == count_of(base, "Correct") + count_of(base, "Ambiguous"),
              "would-be-Correct cases not rerouted to Ambiguous");
        check(count_of(no_correct, "Incorrect") == count_of(base, "Incorrect"), "Incorrect count changed");

        for (const char* only : {"Correct", "Incorrect", "Ambiguous"}) {
            const auto h = with({"--only-action", only});
            check(h.size() == 1 && count_of(h, only) == 20, std::string("--only-action ") + only + " leaked");
        }

        const std::vector<std::string> strict{"--set", "thresholds.preset=biography"};
        auto strict_base = with(strict);
        check(count_of(strict_base, "Ambiguous") > 0, "strict baseline has no Ambiguous case");
        auto no_ambiguous = strict;
        no_ambiguous.insert(no_ambiguous.end(), {"--disable-action", "Ambiguous"});
        check(count_of(with(no_ambiguous), "Ambiguous") == 0, "Ambiguous survived --disable-action Ambiguous");
    });

    criterion(7, "degradation is byte-identical per seed and nests as p grows", 0, [](Check& check) {
        const auto ds = harness::load_dataset(fixture_dir() / "dataset.jsonl");
        std::set<std::string> prev;
        for (double p : {0.0, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0}) {
            const auto a = harness::degrade(ds, p, 20260101);
            const auto b = harness::degrade(harness::load_dataset(fixture_dir() / "dataset.jsonl"), p, 20260101);
            check(dataset_bytes(a) == dataset_bytes(b), "degraded bytes differ across runs");
            const auto cur = removed_docs(ds, a);
            check(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()), "removed sets do not nest");
            for (const auto& r : cur) check(r.find("/r") != std::string::npos, "an irrelevant document was removed");
            prev = cur;
        }
        check(prev.size() == 25, "p=1 did not remove every relevant document");
    });

    criterion(8, "second fetch of a URL is served from the cache", 0, [](Check& check) {
        TempDir dir;
        InProcessMock mock;
        SearchConfig cfg;
        cfg.cache_dir = dir.path;
        PageFetcher fetcher(cfg, mock.transport);
        const SearchResult r{std::string(InProcessMock::kBase) + "/wiki/Paris", std::nullopt, 1};
        const auto first = fetcher.fetch(r);
        const auto second = fetcher.fetch(r);
        check(mock.transport->calls() == 1, "expected one network request, saw " + std::to_string(mock.transport->calls()));
        check(first == second, "cached page differs");
        check(!first.paragraphs.empty(), "page had no paragraphs");
    });

    criterion(9, "threshold presets load as published; overrides win", 0, [](Check& check) {
        const std::vector<std::tuple<const char*, double, double>> published{
            {"popqa", 0.59, -0.99}, {"pubhealth", 0.5, -0.91}, {"arc_challenge", 0.5, -0.91}, {"biography", 0.95, -0.91}};
        for (const auto& [name, up, lo] : published) {
            const auto cfg = config::build({json{{"thresholds", {{"preset", name}}}}});
            check(cfg.thresholds.upper() == up && cfg.thresholds.lower() == lo, std::string("preset ") + name);
        }
        TempDir dir;
        std::ofstream(dir.path / "c.json") << R"({"thresholds": {"preset": "biography", "upper": 0.8}})";
        check(config::load(dir.path / "c.json", json::object()).thresholds == Thresholds(0.8, -0.91),
              "file value did not override its preset");
        json cli_layer = json::object();
        config::add_override(cli_layer, "thresholds.upper=0.7");
        check(config::load(dir.path / "c.json", cli_layer).thresholds == Thresholds(0.7, -0.91),
              "command line did not override the file");
    });

    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures;
}
