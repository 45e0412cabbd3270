#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "floodsom/errors.hpp"
#include "floodsom/pipeline.hpp"
#include "test_util.hpp"

using namespace floodsom;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config(const fs::path& out) {
    PipelineConfig cfg;
    cfg.terrain.nrows = cfg.terrain.ncols = 30;
    cfg.terrain.bump_sigma_min = 80.0;
    cfg.terrain.bump_sigma_max = 150.0;
    cfg.sim.duration = 1800.0;
    cfg.sampling.n_locations = 6;
    cfg.sampling.n_train = 4;
    cfg.sampling.margin = 3;
    cfg.feature_radius = 1;
    cfg.som_zero.rows = cfg.som_zero.cols = 6;
    cfg.som_wet.rows = cfg.som_wet.cols = 5;
    cfg.som_zero.epochs = cfg.som_wet.epochs = 5;
    cfg.k = 3;
    cfg.threads = 2;
    cfg.output_dir = out;
    cfg.resolve_seeds();
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Relative path -> contents for every non-timing artifact.
std::map<std::string, std::string> artifacts(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root);
        if (!is_timing_artifact(rel)) out[rel.generic_string()] = slurp(e.path());
    }
    return out;
}

int run_cli(const std::string& args, std::string* stderr_text = nullptr) {
    testutil::TempDir tmp("cli_err");
    const auto err = tmp.path() / "stderr.txt";
    const std::string cmd =
        std::string(FLOODSOM_CLI) + " " + args + " >/dev/null 2>" + err.string();
    const int status = std::system(cmd.c_str());
    if (stderr_text) *stderr_text = slurp(err);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config JSON round-trips and validates") {
    const auto cfg = small_config("x");
    const auto j = config_to_json(cfg);
    const auto back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(back.som_zero.seed == cfg.som_zero.seed);

    auto bad = j;
    bad["sampling"]["n_train"] = 6;
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = j;
    bad["k"] = "five";
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = j;
    bad["hydrograph"] = json::array({json::array({1.0, 0.0})});
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);

    // partial configs fall back to defaults; stage seeds follow the root seed
    const auto partial = config_from_json(json{{"seed", 7}});
    CHECK(partial.sampling.n_locations == 29);
    CHECK(partial.sampling.n_train == 22);
    CHECK(partial.terrain.seed != PipelineConfig{}.terrain.seed);
    CHECK(partial.som_zero.seed != partial.som_wet.seed);
}

TEST_CASE("first n_train locations train, the rest validate") {
    const std::vector<CellIndex> cells{{1, 1}, {2, 2}, {3, 3}};
    const auto s = split_locations(cells, 2);
    REQUIRE(s.train.size() == 2);
    REQUIRE(s.validation.size() == 1);
    CHECK(s.train[0].id == "loc00");
    CHECK(s.validation[0].id == "loc02");
    CHECK(s.validation[0].cell == CellIndex{3, 3});
    const auto back = locations_from_json(locations_to_json(s));
    CHECK(back.train[1].cell == CellIndex{2, 2});
    CHECK_THROWS_AS(split_locations(cells, 4), InputError);
}

TEST_CASE("timing artifacts are recognised") {
    CHECK(is_timing_artifact("runs/timings.json"));
    CHECK(is_timing_artifact("predictions/timings.json"));
    CHECK(is_timing_artifact("timings.json"));
    CHECK(is_timing_artifact("report.txt"));
    CHECK_FALSE(is_timing_artifact("report.json"));
    CHECK_FALSE(is_timing_artifact("runs/loc00.asc"));
}

TEST_CASE("a stage without its inputs names the missing file") {
    testutil::TempDir tmp("missing");
    const auto cfg = small_config(tmp.path());
    try {
        stage_dataset(cfg);
        FAIL("expected MissingArtifact");
    } catch (const MissingArtifact& e) {
        CHECK(std::string(e.what()).find("dem.asc") != std::string::npos);
    }
    stage_gen_dem(cfg);
    CHECK_THROWS_WITH_AS(stage_dataset(cfg), doctest::Contains("locations.json"), MissingArtifact);
}

TEST_CASE("full small pipeline is complete, disjoint and reproducible") {
    testutil::TempDir a("pipe_a"), b("pipe_b");
    run_pipeline(small_config(a.path()));
    run_pipeline(small_config(b.path()));

    const ArtifactPaths paths{a.path()};
    for (const auto& p : {paths.dem(), paths.locations(), paths.dataset(), paths.stats(),
                          paths.som_zero(), paths.som_wet(), paths.combined(),
                          paths.train_summary(), paths.report_json(), paths.report_txt(),
                          paths.timings(), paths.run_timings(), paths.prediction_timings()})
        CHECK_MESSAGE(fs::exists(p), p.string());

    const auto split = locations_from_json(read_json_file(paths.locations()));
    CHECK(split.train.size() == 4);
    CHECK(split.validation.size() == 2);
    std::set<std::pair<std::size_t, std::size_t>> cells;
    for (const auto* list : {&split.train, &split.validation})
        for (const auto& l : *list) cells.insert({l.cell.row, l.cell.col});
    CHECK(cells.size() == 6);
    for (const auto& l : split.validation) CHECK(fs::exists(paths.prediction(l.id)));

    const auto report = read_json_file(paths.report_json());
    CHECK(report["validation_locations"].size() == 2);
    CHECK(report.contains("aggregate"));
    CHECK_FALSE(report.contains("speedup"));
    CHECK(read_json_file(paths.timings()).contains("speedup"));

    const auto summary = read_json_file(paths.train_summary());
    CHECK(summary["zero_samples"].get<std::size_t>() + summary["wet_samples"].get<std::size_t>() ==
          4u * 900u);
    CHECK(summary["som_zero"]["quantization_error_final"].get<double>() <=
          summary["som_zero"]["quantization_error_initial"].get<double>());

    const auto first = artifacts(a.path());
    CHECK(first == artifacts(b.path()));
    CHECK(first.count("config.json") == 1);

    // rerunning a stage over unchanged inputs rewrites identical bytes
    stage_train(small_config(a.path()));
    stage_predict(small_config(a.path()));
    stage_eval(small_config(a.path()));
    CHECK(artifacts(a.path()) == first);
}

TEST_CASE("command-line exit codes") {
    CHECK(run_cli("bogus-stage") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("predict --row 3") == 2);

    testutil::TempDir tmp("cli");
    const auto cfg_path = tmp.path() / "cfg.json";
    write_json_file(config_to_json(small_config(tmp.path() / "out")), cfg_path);
    CHECK(run_cli("gen-dem --config " + cfg_path.string()) == 0);
    const auto dem = read_asc(tmp.path() / "out" / "dem.asc");
    CHECK(dem.nrows() == 30);
    CHECK(dem == generate_synthetic_dem(small_config("x").terrain));

    std::string err;
    CHECK(run_cli("train --config " + cfg_path.string(), &err) == 1);
    CHECK(err.find("missing artifact") != std::string::npos);
    CHECK(err.find("stats.json") != std::string::npos);

    CHECK(run_cli("gen-dem --config " + (tmp.path() / "nope.json").string()) == 1);
    CHECK(run_cli("gen-dem --seed 5 --out " + (tmp.path() / "s5").string()) == 0);
}

}  // TEST_SUITE
