#include "floodsom/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "floodsom/errors.hpp"
#include "floodsom/json_io.hpp"
#include "floodsom/numfmt.hpp"

namespace floodsom {

void extract_features_into(const DemGrid& dem, CellIndex source, CellIndex target,
                           std::size_t radius, std::span<double> out) {
    if (!dem.contains(source) || !dem.contains(target))
        throw InputError("feature extraction cell outside the grid");
    if (radius < 1) throw InputError("feature radius must be at least 1");
    if (out.size() != feature_dim_for_radius(radius))
        throw InputError("feature buffer has the wrong length");

    const auto rows = static_cast<long>(dem.nrows());
    const auto cols = static_cast<long>(dem.ncols());
    const auto rad = static_cast<long>(radius);
    const auto tr = static_cast<long>(target.row);
    const auto tc = static_cast<long>(target.col);
    const double z_target = dem.at(target);

    std::size_t k = 0;
    for (long dr = -rad; dr <= rad; ++dr) {
        const auto r = static_cast<std::size_t>(std::clamp(tr + dr, 0L, rows - 1));
        for (long dc = -rad; dc <= rad; ++dc) {
            const auto c = static_cast<std::size_t>(std::clamp(tc + dc, 0L, cols - 1));
            out[k++] = dem.at(r, c) - z_target;
        }
    }

    const double extent = static_cast<double>(std::max(dem.nrows(), dem.ncols())) * dem.cell_size();
    const double dx = (static_cast<double>(target.col) - static_cast<double>(source.col)) *
                      dem.cell_size() / extent;
    const double dy = (static_cast<double>(source.row) - static_cast<double>(target.row)) *
                      dem.cell_size() / extent;
    out[k++] = dx;
    out[k++] = dy;
    out[k++] = std::sqrt(dx * dx + dy * dy);
    out[k++] = z_target - dem.at(source);
}

FeatureVector extract_features(const DemGrid& dem, CellIndex source, CellIndex target,
                               std::size_t radius) {
    if (radius < 1) throw InputError("feature radius must be at least 1");
    FeatureVector v(feature_dim_for_radius(radius));
    extract_features_into(dem, source, target, radius, v);
    return v;
}

NormStats compute_norm_stats(std::span<const Sample> samples, std::size_t feature_dim) {
    if (samples.empty()) throw InputError("cannot compute statistics of an empty dataset");
    NormStats s;
    s.mean.assign(feature_dim, 0.0);
    s.std.assign(feature_dim, 0.0);
    s.constant_mask.assign(feature_dim, false);
    const auto n = static_cast<double>(samples.size());
    for (const auto& smp : samples)
        for (std::size_t j = 0; j < feature_dim; ++j) s.mean[j] += smp.features[j];
    for (auto& m : s.mean) m /= n;
    for (const auto& smp : samples)
        for (std::size_t j = 0; j < feature_dim; ++j) {
            const double d = smp.features[j] - s.mean[j];
            s.std[j] += d * d;
        }
    for (std::size_t j = 0; j < feature_dim; ++j) {
        s.std[j] = std::sqrt(s.std[j] / n);
        // rounding in the mean leaves ~1e-17 spread on truly constant columns
        if (s.std[j] <= 1e-12 * std::max(1.0, std::abs(s.mean[j]))) {
            s.std[j] = 0.0;
            s.constant_mask[j] = true;
        }
    }
    return s;
}

Dataset build_dataset(const DemGrid& dem, std::span<const SimulationRun> runs,
                      std::size_t radius) {
    if (runs.empty()) throw InputError("build_dataset needs at least one simulation run");
    validate_dem(dem);
    Dataset ds;
    ds.feature_dim = feature_dim_for_radius(radius);
    ds.feature_radius = radius;
    ds.samples.reserve(runs.size() * dem.size());
    for (const auto& run : runs) {
        if (!run.depths.same_shape(dem))
            throw InputError("depth raster of run '" + run.sim_id + "' does not match the DEM");
        for (std::size_t r = 0; r < dem.nrows(); ++r) {
            for (std::size_t c = 0; c < dem.ncols(); ++c) {
                Sample s;
                s.features = extract_features(dem, run.source, {r, c}, radius);
                s.depth = run.depths.at(r, c);
                if (!(s.depth >= 0.0)) throw InputError("negative or NaN depth label");
                s.source = run.source;
                s.target = {r, c};
                s.sim_id = run.sim_id;
                ds.samples.push_back(std::move(s));
            }
        }
    }
    ds.norm_stats = compute_norm_stats(ds.samples, ds.feature_dim);
    return ds;
}

std::pair<Dataset, Dataset> clamp_and_split(const Dataset& ds, double theta) {
    Dataset zero, wet;
    for (Dataset* part : {&zero, &wet}) {
        part->feature_dim = ds.feature_dim;
        part->feature_radius = ds.feature_radius;
        part->norm_stats = ds.norm_stats;
        part->normalized = ds.normalized;
    }
    for (const auto& s : ds.samples) {
        if (s.depth < theta) {
            zero.samples.push_back(s);
            zero.samples.back().depth = 0.0;
        } else {
            wet.samples.push_back(s);
        }
    }
    return {std::move(zero), std::move(wet)};
}

void apply_normalization_into(const NormStats& stats, std::span<double> v) {
    if (v.size() != stats.dim()) throw InputError("feature vector length does not match stats");
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = stats.constant_mask[j] ? 0.0 : (v[j] - stats.mean[j]) / stats.std[j];
}

FeatureVector apply_normalization(const NormStats& stats, const FeatureVector& v) {
    FeatureVector out = v;
    apply_normalization_into(stats, out);
    return out;
}

FeatureVector invert_normalization(const NormStats& stats, const FeatureVector& v) {
    if (v.size() != stats.dim()) throw InputError("feature vector length does not match stats");
    FeatureVector out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        out[j] = stats.constant_mask[j] ? stats.mean[j] : v[j] * stats.std[j] + stats.mean[j];
    return out;
}

Dataset normalize(const Dataset& ds) {
    if (ds.empty()) throw InputError("cannot normalize an empty dataset");
    if (ds.normalized) throw InputError("dataset is already normalized");
    Dataset out = ds;
    for (auto& s : out.samples) apply_normalization_into(out.norm_stats, s.features);
    out.normalized = true;
    return out;
}

// ---------------------------------------------------------------------------
// persistence

void write_dataset(const Dataset& ds, const std::filesystem::path& jsonl,
                   const std::filesystem::path& stats_json) {
    std::ofstream f(jsonl, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + jsonl.string() + " for writing");
    std::string line;
    for (const auto& s : ds.samples) {
        line.clear();
        line += "{\"features\":[";
        for (std::size_t j = 0; j < s.features.size(); ++j) {
            if (j) line += ',';
            append_number(line, s.features[j]);
        }
        line += "],\"depth\":";
        append_number(line, s.depth);
        line += ",\"source\":[" + std::to_string(s.source.row) + ',' +
                std::to_string(s.source.col) + "],\"target\":[" + std::to_string(s.target.row) +
                ',' + std::to_string(s.target.col) + "],\"sim_id\":" + json(s.sim_id).dump() +
                "}\n";
        f << line;
    }
    if (!f) throw std::runtime_error("failed writing " + jsonl.string());

    json stats = ds.norm_stats;
    stats["feature_dim"] = ds.feature_dim;
    stats["feature_radius"] = ds.feature_radius;
    stats["sample_count"] = ds.samples.size();
    stats["normalized"] = ds.normalized;
    write_json_file(stats, stats_json);
}

Dataset read_dataset(const std::filesystem::path& jsonl, const std::filesystem::path& stats_json) {
    const json stats = read_json_file(stats_json);
    Dataset ds;
    ds.norm_stats = stats.get<NormStats>();
    ds.feature_dim = stats.at("feature_dim").get<std::size_t>();
    ds.feature_radius = stats.at("feature_radius").get<std::size_t>();
    ds.normalized = stats.value("normalized", false);
    if (ds.norm_stats.dim() != ds.feature_dim)
        throw ParseError(stats_json.string() + ": stats length does not match feature_dim");

    std::ifstream f(jsonl, std::ios::binary);
    if (!f) throw std::runtime_error("missing file: " + jsonl.string());
    ds.samples.reserve(stats.value("sample_count", std::size_t{0}));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            Sample s;
            s.features = j.at("features").get<std::vector<double>>();
            s.depth = j.at("depth").get<double>();
            s.source = j.at("source").get<CellIndex>();
            s.target = j.at("target").get<CellIndex>();
            s.sim_id = j.at("sim_id").get<std::string>();
            if (s.features.size() != ds.feature_dim) throw ParseError("wrong feature count");
            ds.samples.push_back(std::move(s));
        } catch (const std::exception& e) {
            throw ParseError(jsonl.string() + ": line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return ds;
}

}  // namespace floodsom
