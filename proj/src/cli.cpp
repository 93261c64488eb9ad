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

#include "crag/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "crag/config.hpp"
#include "crag/error.hpp"
#include "crag/harness.hpp"
#include "crag/mock_server.hpp"
#include "crag/pipeline.hpp"

namespace crag::cli {

using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;

extern "C" void request_stop(int) { g_stop_requested = 1; }

void configure_logging(const std::string& level) {
    static const bool once = [] {
        auto logger = spdlog::stderr_color_mt("crag");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)once;
    spdlog::set_level(spdlog::level::from_str(level));
}

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    bool offline = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", o.overrides, "Override a config key, e.g. --set thresholds.upper=0.7 (repeatable)");
    cmd->add_flag("--offline", o.offline, "Forbid every non-loopback endpoint");
}

PipelineConfig load_config(const CommonOptions& o, json overrides) {
    for (const auto& a : o.overrides) config::add_override(overrides, a);
    if (o.offline) config::set_key(overrides, "offline", true);
    std::optional<std::filesystem::path> path;
    if (!o.config_path.empty()) path = o.config_path;
    return config::load(path, overrides);
}

int cmd_judge(const std::string& question, const std::string& docs_path, const CommonOptions& common,
              std::ostream& out) {
    const auto cfg = load_config(common, json::object());
    std::ifstream in(docs_path);
    if (!in) throw ParseError("cannot open " + docs_path, 0);
    const auto docs = harness::parse_documents(in);
    if (docs.empty()) throw InvalidArgument("no documents");

    PipelineServices services(cfg, std::make_shared<http::NetworkTransport>());
    const QueryText q(question);
    const auto scores = services.deps().scorer.score_batch(q, docs);
    const auto j = judge(scores, cfg.thresholds);

    json reply{{"question", q.str()}, {"action", std::string(to_string(j.action))}, {"max_score", j.max_score.value()}};
    json per_doc = json::array();
    for (std::size_t i = 0; i < docs.size(); ++i) per_doc.push_back({{"id", docs[i].id}, {"score", scores[i].value()}});
    reply["scores"] = per_doc;
    reply["thresholds"] = {{"upper", cfg.thresholds.upper()}, {"lower", cfg.thresholds.lower()}};
    out << reply.dump(2) << '\n';
    return kOk;
}

struct RunOptions {
    std::string dataset;
    std::string mode = "crag";
    std::optional<double> degrade_p;
    std::uint64_t seed = 0;
    std::string disable_action;
    std::string only_action;
    bool no_refinement = false;
    bool no_rewriting = false;
    bool no_selection = false;
    std::optional<int> workers;
    std::string out_path = "report.json";
    std::string csv_path;
};

int cmd_run(const RunOptions& o, const CommonOptions& common, std::ostream& out) {
    json overrides = json::object();
    if (!o.disable_action.empty()) config::set_key(overrides, "ablations.disable_action", o.disable_action);
    if (!o.only_action.empty()) config::set_key(overrides, "ablations.only_action", o.only_action);
    if (o.no_refinement) config::set_key(overrides, "ablations.no_refinement", true);
    if (o.no_rewriting) config::set_key(overrides, "ablations.no_rewriting", true);
    if (o.no_selection) config::set_key(overrides, "ablations.no_selection", true);
    if (o.workers) config::set_key(overrides, "workers", *o.workers);
    const auto cfg = load_config(common, overrides);

    const auto mode = harness::parse_mode(o.mode);
    if (!mode) throw ConfigError("unknown mode '" + o.mode + "' (crag, plain_rag, rag_web)");
    const auto dataset = harness::load_dataset(o.dataset);
    std::optional<harness::Degradation> degradation;
    if (o.degrade_p) degradation = harness::Degradation{*o.degrade_p, o.seed};

    PipelineServices services(cfg, std::make_shared<http::NetworkTransport>());
    const auto report = harness::run_experiment(dataset, cfg, *mode, degradation, services.deps());

    {
        std::ofstream f(o.out_path);
        if (!f) throw Error("cannot write report " + o.out_path);
        f << harness::to_json(report).dump(2) << '\n';
    }
    if (!o.csv_path.empty()) {
        const bool fresh = !std::filesystem::exists(o.csv_path) || std::filesystem::file_size(o.csv_path) == 0;
        std::ofstream f(o.csv_path, std::ios::app);
        if (!f) throw Error("cannot write CSV " + o.csv_path);
        if (fresh) f << harness::csv_header() << '\n';
        f << harness::csv_row(report) << '\n';
    }
    spdlog::info("{} on {} instances: accuracy {:.3f}", harness::to_string(*mode), report.results.size(),
                 report.accuracy);
    out << o.out_path << '\n';
    return kOk;
}

int cmd_mock_serve(const std::string& fixtures, const std::string& host, int port, std::ostream& out) {
    auto backend = std::make_shared<mock::MockBackend>(mock::MockData::from_directory(fixtures));
    mock::MockServer server(backend, host, port);
    out << "listening on " << server.base_url() << std::endl;
    g_stop_requested = 0;
    std::signal(SIGINT, request_stop);
    std::signal(SIGTERM, request_stop);
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Corrective retrieval-augmented generation toolkit"};
    app.footer(
        "Exit codes: 0 success, 2 usage or input error, 3 runtime or network error.\n"
        "Environment: CRAG_SEARCH_API_KEY (or the variable named by search.api_key_env) is sent\n"
        "to the search endpoint as X-API-Key.");
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "error, warn, info or debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

    CommonOptions common;

    auto* judge_cmd = app.add_subcommand("judge", "Score documents for a question and print the triggered action");
    std::string question, docs_path;
    judge_cmd->add_option("-q,--question", question, "Question text")->required();
    judge_cmd->add_option("-d,--docs", docs_path, "Documents JSONL ({id?, title?, text} per line)")->required();
    add_common(judge_cmd, common);

    auto* run_cmd = app.add_subcommand("run", "Run an experiment over a dataset and write a JSON report");
    RunOptions ro;
    run_cmd->add_option("--dataset", ro.dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--mode", ro.mode, "crag, plain_rag or rag_web")
        ->check(CLI::IsMember({"crag", "plain_rag", "rag_web"}));
    run_cmd->add_option("--degrade-p", ro.degrade_p, "Drop each relevant document with this probability")
        ->check(CLI::Range(0.0, 1.0));
    run_cmd->add_option("--seed", ro.seed, "Seed for degradation");
    run_cmd->add_option("--disable-action", ro.disable_action, "Correct, Incorrect or Ambiguous");
    run_cmd->add_option("--only-action", ro.only_action, "Force every query down one action");
    run_cmd->add_flag("--no-refinement", ro.no_refinement, "Use raw documents as internal knowledge");
    run_cmd->add_flag("--no-rewriting", ro.no_rewriting, "Search with the raw question");
    run_cmd->add_flag("--no-selection", ro.no_selection, "Keep every fetched paragraph");
    run_cmd->add_option("--workers", ro.workers, "Concurrent instances")->check(CLI::PositiveNumber);
    run_cmd->add_option("-o,--out", ro.out_path, "Report path");
    run_cmd->add_option("--csv", ro.csv_path, "Append a summary row to this CSV");
    add_common(run_cmd, common);

    auto* serve_cmd = app.add_subcommand("mock-serve", "Serve fixture-backed search, page, generate and score routes");
    std::string fixtures = "data/fixture/mock";
    std::string host = "127.0.0.1";
    int port = 8089;
    serve_cmd->add_option("--fixtures", fixtures, "Fixture directory")->check(CLI::ExistingDirectory);
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("-p,--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        configure_logging(log_level);
        if (*judge_cmd) return cmd_judge(question, docs_path, common, out);
        if (*run_cmd) return cmd_run(ro, common, out);
        if (*serve_cmd) return cmd_mock_serve(fixtures, host, port, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kUsageError;
    } catch (const InvalidArgument& e) {
        err << "input error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace crag::cli
