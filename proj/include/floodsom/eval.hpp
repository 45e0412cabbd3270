#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floodsom/ca_flood.hpp"
#include "floodsom/json_io.hpp"
#include "floodsom/predictor.hpp"
#include "floodsom/terrain.hpp"

namespace floodsom {

/// Population statistics, meters.
struct DepthStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

struct DiffStats {
    double min_abs = 0.0;
    double max_abs = 0.0;
    double mae = 0.0;
    /// mae / mean truth depth over all cells; empty when the truth mean is 0.
    std::optional<double> relative_mae;
    double std_abs = 0.0;
};

struct ExtentMetrics {
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::size_t false_alarms = 0;
    std::size_t correct_negatives = 0;
    /// hits / (hits + misses + false_alarms); 1 when neither map has a wet cell.
    double csi = 1.0;
};

DepthStats depth_stats(std::span<const double> values);
inline DepthStats depth_stats(const Raster& grid) { return depth_stats(grid.values()); }

DiffStats compare_grids(std::span<const double> pred, std::span<const double> truth);
DiffStats compare_grids(const Raster& pred, const Raster& truth);

/// Cells with depth >= theta count as wet.
ExtentMetrics extent_metrics(std::span<const double> pred, std::span<const double> truth,
                             double theta = 0.03);
ExtentMetrics extent_metrics(const Raster& pred, const Raster& truth, double theta = 0.03);

struct LocationReport {
    std::string id;
    CellIndex source;
    DepthStats truth;
    DepthStats predicted;
    DiffStats diff;
    ExtentMetrics extent;
    double ca_time = 0.0;   ///< s
    double som_time = 0.0;  ///< s
};

/**
 * Side-by-side comparison of the two models. `aggregate` pools every cell of every
 * validation map; its times are per-location means.
 */
struct EvalReport {
    std::vector<LocationReport> locations;
    LocationReport aggregate;
    double speedup = 0.0;  ///< aggregate ca_time / som_time
    double theta = 0.03;
};

struct EvalCase {
    std::string id;
    CellIndex source;
    const Raster* truth = nullptr;
    const Raster* predicted = nullptr;
    double ca_time = 0.0;
    double som_time = 0.0;
};

/// Pure: identical inputs give an identical report.
EvalReport build_report(std::span<const EvalCase> cases, double theta = 0.03);

/**
 * Times simulate() and predict_map() for each source one after the other
 * (never concurrently) and builds the report. Ids default to "loc<i>".
 * Each model runs `repeats` times per source; the median time is reported.
 */
EvalReport run_benchmark(const DemGrid& dem, const Hydrograph& hydrograph, const CombinedModel& cm,
                         std::span<const CellIndex> sources, const SimParams& params,
                         std::size_t radius, std::span<const std::string> ids = {},
                         std::size_t repeats = 1);

/// "11 s", "0.412 s": three significant digits below 1000 s.
std::string format_seconds(double seconds);
/// som - ca with its relative change, e.g. "-9 s (-81.8%)".
std::string format_time_delta(double ca_time, double som_time);
/// "0.072 m (18.5%)": value with its ratio to `reference`.
std::string format_depth_delta(double value, double reference);

/// Aligned plain-text comparison table, aggregate first then each location.
std::string format_report_table(const EvalReport& report);

/// Timings are left out unless requested so the accuracy report stays reproducible.
json report_to_json(const EvalReport& report, bool with_timings);
/// Per-location and aggregate wall-clock times.
json timings_to_json(const EvalReport& report);

}  // namespace floodsom
