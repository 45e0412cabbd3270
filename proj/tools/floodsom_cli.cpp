// floodsom: command-line driver for the flood surrogate workflow.
//
//   floodsom <stage> [--config cfg.json] [--seed N] [--out DIR]
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "floodsom/errors.hpp"
#include "floodsom/pipeline.hpp"
#include "floodsom/service.hpp"

namespace {

floodsom::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace floodsom;

    CLI::App app{"Self-organizing-map flood emulator: terrain, CA simulation, training, "
                 "prediction and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON pipeline config (defaults when omitted)");
    app.add_option("--seed", seed, "override the root seed");
    app.add_option("--out", out_dir, "output directory (overrides config output_dir)");

    app.add_subcommand("gen-dem", "generate the synthetic DEM -> dem.asc");
    app.add_subcommand("simulate", "sample inflow locations and run the CA model -> runs/");
    app.add_subcommand("dataset", "build training samples -> dataset.jsonl, stats.json");
    app.add_subcommand("train", "train the zero and wet SOMs -> som_*.json, combined.json");
    auto* predict = app.add_subcommand("predict", "predict validation maps -> predictions/");
    std::optional<std::size_t> row, col;
    predict->add_option("--row", row, "also predict for this source row");
    predict->add_option("--col", col, "also predict for this source column");
    app.add_subcommand("eval", "compare predictions with CA truth -> report.json, report.txt");
    app.add_subcommand("bench", "time CA vs SOM sequentially on the validation set");
    auto* serve = app.add_subcommand("serve", "HTTP API over the trained model");
    std::optional<std::string> host, static_dir;
    std::optional<int> port;
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port");
    serve->add_option("--static", static_dir, "directory of UI assets served at /");
    app.add_subcommand("pipeline", "run every stage in order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }
    if (row.has_value() != col.has_value()) {
        std::cerr << "--row and --col must be given together\n";
        return 2;
    }

    try {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
            cfg.resolve_seeds();
        }
        if (!out_dir.empty()) cfg.output_dir = out_dir;

        const std::string stage = app.get_subcommands().front()->get_name();
        if (stage == "gen-dem") {
            stage_gen_dem(cfg);
        } else if (stage == "simulate") {
            stage_simulate(cfg);
        } else if (stage == "dataset") {
            stage_dataset(cfg);
        } else if (stage == "train") {
            stage_train(cfg);
        } else if (stage == "predict") {
            std::optional<CellIndex> extra;
            if (row) extra = CellIndex{*row, *col};
            stage_predict(cfg, extra);
        } else if (stage == "eval") {
            stage_eval(cfg);
        } else if (stage == "bench") {
            const auto report = stage_bench(cfg);
            std::printf("mean CA %.4f s, mean SOM %.4f s, speedup %.2fx\n",
                        report.aggregate.ca_time, report.aggregate.som_time, report.speedup);
        } else if (stage == "serve") {
            if (host) cfg.serve.host = *host;
            if (port) cfg.serve.port = *port;
            if (static_dir) cfg.serve.static_dir = *static_dir;
            const ServeState state = load_serve_state(cfg);
            Server server(state);
            if (!cfg.serve.static_dir.empty()) server.mount_static(cfg.serve.static_dir);
            const int bound = server.bind(cfg.serve.host, cfg.serve.port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::printf("serving on http://%s:%d\n", cfg.serve.host.c_str(), bound);
            std::fflush(stdout);
            server.listen();
            g_server = nullptr;
        } else if (stage == "pipeline") {
            run_pipeline(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
