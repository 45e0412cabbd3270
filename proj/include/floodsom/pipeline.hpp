#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "floodsom/ca_flood.hpp"
#include "floodsom/eval.hpp"
#include "floodsom/json_io.hpp"
#include "floodsom/predictor.hpp"
#include "floodsom/som.hpp"
#include "floodsom/terrain.hpp"

namespace floodsom {

struct SamplingConfig {
    std::size_t n_locations = 29;
    std::size_t n_train = 22;
    double min_separation = 100.0;  ///< m
    std::size_t margin = 5;         ///< cells
};

struct ServeConfig {
    std::string host = "127.0.0.1";
    int port = 8811;
    std::string static_dir;  ///< empty: no static UI
};

/**
 * Everything the workflow needs. Stage seeds (terrain, sampling, both maps)
 * are derived from `seed` by stage name; seed fields inside the sub-configs
 * are overwritten by resolve_seeds().
 */
struct PipelineConfig {
    std::uint64_t seed = 2018;
    TerrainConfig terrain;
    Hydrograph hydrograph = Hydrograph::default_triangle();
    SimParams sim;
    SamplingConfig sampling;
    std::size_t feature_radius = 3;
    SomConfig som_zero;
    SomConfig som_wet;
    std::size_t k = 5;
    double theta = 0.03;
    std::size_t threads = 0;  ///< concurrent CA runs in `simulate`; 0 = hardware
    std::filesystem::path output_dir = "out";
    ServeConfig serve;

    PipelineConfig();
    /// Recomputes every stage seed from `seed`.
    void resolve_seeds();
    void validate() const;
};

PipelineConfig config_from_json(const json& j);
json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

/// Thrown when a stage's input artifact does not exist.
class MissingArtifact : public std::runtime_error {
public:
    explicit MissingArtifact(const std::filesystem::path& p)
        : std::runtime_error("missing artifact: " + p.string()) {}
};

struct Location {
    std::string id;
    CellIndex cell;
};

struct LocationSplit {
    std::vector<Location> train;
    std::vector<Location> validation;
};

json locations_to_json(const LocationSplit& split);
LocationSplit locations_from_json(const json& j);

/// First n_train of the seeded sampling order train, the rest validate.
LocationSplit split_locations(const std::vector<CellIndex>& cells, std::size_t n_train);

/**
 * Artifact layout under the output directory. Files marked (timing) hold
 * wall-clock measurements and are the only ones that differ between runs.
 */
struct ArtifactPaths {
    std::filesystem::path root;
    std::filesystem::path dem() const { return root / "dem.asc"; }
    std::filesystem::path locations() const { return root / "locations.json"; }
    std::filesystem::path run(const std::string& id) const { return root / "runs" / (id + ".asc"); }
    std::filesystem::path run_timings() const { return root / "runs" / "timings.json"; }  // (timing)
    std::filesystem::path dataset() const { return root / "dataset.jsonl"; }
    std::filesystem::path stats() const { return root / "stats.json"; }
    std::filesystem::path som_zero() const { return root / "som_zero.json"; }
    std::filesystem::path som_wet() const { return root / "som_wet.json"; }
    std::filesystem::path combined() const { return root / "combined.json"; }
    std::filesystem::path train_summary() const { return root / "train_summary.json"; }
    std::filesystem::path prediction(const std::string& id) const {
        return root / "predictions" / (id + ".asc");
    }
    std::filesystem::path prediction_timings() const {  // (timing)
        return root / "predictions" / "timings.json";
    }
    std::filesystem::path report_json() const { return root / "report.json"; }
    std::filesystem::path report_txt() const { return root / "report.txt"; }  // (timing)
    std::filesystem::path timings() const { return root / "timings.json"; }   // (timing)
};

/// True for artifacts that carry wall-clock times.
bool is_timing_artifact(const std::filesystem::path& relative);

void stage_gen_dem(const PipelineConfig& cfg);
void stage_simulate(const PipelineConfig& cfg);
void stage_dataset(const PipelineConfig& cfg);
void stage_train(const PipelineConfig& cfg);
/// Predicts every validation location, plus `extra` if given.
void stage_predict(const PipelineConfig& cfg, std::optional<CellIndex> extra = std::nullopt);
void stage_eval(const PipelineConfig& cfg);
/// Fresh sequential timings of simulate vs predict_map over the validation set.
EvalReport stage_bench(const PipelineConfig& cfg);
/// All stages in order.
void run_pipeline(const PipelineConfig& cfg);

}  // namespace floodsom
