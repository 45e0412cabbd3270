#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floodsom/terrain.hpp"

namespace floodsom {

/**
 * Per-cell feature layout:
 *
 *   [0, (2r+1)^2)   terrain patch around the target, z_neighbour - z_target, row-major
 *   +0              dx  = (x_target - x_source) / extent
 *   +1              dy  = (y_target - y_source) / extent   (north-positive)
 *   +2              dist = sqrt(dx^2 + dy^2)
 *   +3              dz_source = z_target - z_source, m
 *
 * extent = max(domain width, domain height).
 */
using FeatureVector = std::vector<double>;

constexpr std::size_t feature_dim_for_radius(std::size_t r) { return (2 * r + 1) * (2 * r + 1) + 4; }

FeatureVector extract_features(const DemGrid& dem, CellIndex source, CellIndex target,
                               std::size_t radius);

/// Writes into `out` (size feature_dim_for_radius(radius)); no allocation.
void extract_features_into(const DemGrid& dem, CellIndex source, CellIndex target,
                           std::size_t radius, std::span<double> out);

/// Per-component z-score statistics. Constant components are masked.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<bool> constant_mask;

    std::size_t dim() const { return mean.size(); }
    friend bool operator==(const NormStats&, const NormStats&) = default;
};

struct Sample {
    FeatureVector features;
    double depth = 0.0;  ///< m
    CellIndex source;
    CellIndex target;
    std::string sim_id;
};

struct Dataset {
    std::vector<Sample> samples;
    std::size_t feature_dim = 0;
    std::size_t feature_radius = 0;
    NormStats norm_stats;
    bool normalized = false;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

struct SimulationRun {
    std::string sim_id;
    CellIndex source;
    Raster depths;
};

/// One sample per (run, cell), run-major then row-major; stats over all samples.
Dataset build_dataset(const DemGrid& dem, std::span<const SimulationRun> runs,
                      std::size_t radius);

/// Population mean/std per component; std == 0 marks the component constant.
NormStats compute_norm_stats(std::span<const Sample> samples, std::size_t feature_dim);

/**
 * Depth < theta goes to the first (zero) set with the label forced to 0;
 * the rest go to the second (wet) set unchanged. Both keep ds's stats.
 */
std::pair<Dataset, Dataset> clamp_and_split(const Dataset& ds, double theta = 0.03);

/// z-scores ds's features with its own norm_stats. Labels stay in meters.
Dataset normalize(const Dataset& ds);

void apply_normalization_into(const NormStats& stats, std::span<double> v);
FeatureVector apply_normalization(const NormStats& stats, const FeatureVector& v);
/// Inverse of apply_normalization on non-masked components; masked ones map to the mean.
FeatureVector invert_normalization(const NormStats& stats, const FeatureVector& v);

/// JSON-lines samples plus sidecar stats file.
void write_dataset(const Dataset& ds, const std::filesystem::path& jsonl,
                   const std::filesystem::path& stats_json);
Dataset read_dataset(const std::filesystem::path& jsonl, const std::filesystem::path& stats_json);

}  // namespace floodsom
