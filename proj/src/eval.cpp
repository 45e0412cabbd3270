#include "floodsom/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "floodsom/errors.hpp"

namespace floodsom {

DepthStats depth_stats(std::span<const double> values) {
    if (values.empty()) throw InputError("depth_stats of an empty grid");
    DepthStats s{values[0], values[0], 0.0, 0.0};
    double sum = 0.0;
    for (double v : values) {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        sum += v;
    }
    const auto n = static_cast<double>(values.size());
    s.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / n);
    // the rounded mean can stray a few ulps outside [min, max] for near-constant input
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

DiffStats compare_grids(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw InputError("compare_grids: shape mismatch");
    if (pred.empty()) throw InputError("compare_grids: empty grids");
    std::vector<double> diff(pred.size());
    double truth_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        diff[i] = std::abs(pred[i] - truth[i]);
        truth_sum += truth[i];
    }
    const DepthStats d = depth_stats(diff);
    DiffStats out;
    out.min_abs = d.min;
    out.max_abs = d.max;
    out.mae = d.mean;
    out.std_abs = d.std;
    const double truth_mean = truth_sum / static_cast<double>(truth.size());
    if (truth_mean > 0.0) out.relative_mae = out.mae / truth_mean;
    return out;
}

DiffStats compare_grids(const Raster& pred, const Raster& truth) {
    if (!pred.same_shape(truth)) throw InputError("compare_grids: shape mismatch");
    return compare_grids(pred.values(), truth.values());
}

ExtentMetrics extent_metrics(std::span<const double> pred, std::span<const double> truth,
                             double theta) {
    if (pred.size() != truth.size()) throw InputError("extent_metrics: shape mismatch");
    ExtentMetrics m;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] >= theta;
        const bool t = truth[i] >= theta;
        if (p && t) ++m.hits;
        else if (t) ++m.misses;
        else if (p) ++m.false_alarms;
        else ++m.correct_negatives;
    }
    const std::size_t denom = m.hits + m.misses + m.false_alarms;
    m.csi = denom == 0 ? 1.0 : static_cast<double>(m.hits) / static_cast<double>(denom);
    return m;
}

ExtentMetrics extent_metrics(const Raster& pred, const Raster& truth, double theta) {
    if (!pred.same_shape(truth)) throw InputError("extent_metrics: shape mismatch");
    return extent_metrics(pred.values(), truth.values(), theta);
}

namespace {

LocationReport evaluate(std::string id, CellIndex source, std::span<const double> truth,
                        std::span<const double> pred, double theta) {
    LocationReport r;
    r.id = std::move(id);
    r.source = source;
    r.truth = depth_stats(truth);
    r.predicted = depth_stats(pred);
    r.diff = compare_grids(pred, truth);
    r.extent = extent_metrics(pred, truth, theta);
    return r;
}

}  // namespace

EvalReport build_report(std::span<const EvalCase> cases, double theta) {
    if (cases.empty()) throw InputError("evaluation needs at least one validation location");
    EvalReport report;
    report.theta = theta;
    std::vector<double> all_truth, all_pred;
    double ca_sum = 0.0, som_sum = 0.0;
    for (const auto& c : cases) {
        if (!c.truth || !c.predicted) throw InputError("evaluation case without rasters");
        if (!c.truth->same_shape(*c.predicted))
            throw InputError("prediction and truth for '" + c.id + "' differ in shape");
        auto loc = evaluate(c.id, c.source, c.truth->values(), c.predicted->values(), theta);
        loc.ca_time = c.ca_time;
        loc.som_time = c.som_time;
        report.locations.push_back(std::move(loc));
        all_truth.insert(all_truth.end(), c.truth->values().begin(), c.truth->values().end());
        all_pred.insert(all_pred.end(), c.predicted->values().begin(), c.predicted->values().end());
        ca_sum += c.ca_time;
        som_sum += c.som_time;
    }
    report.aggregate = evaluate("aggregate", {}, all_truth, all_pred, theta);
    const auto n = static_cast<double>(cases.size());
    report.aggregate.ca_time = ca_sum / n;
    report.aggregate.som_time = som_sum / n;
    report.speedup = report.aggregate.som_time > 0.0
                         ? report.aggregate.ca_time / report.aggregate.som_time
                         : 0.0;
    return report;
}

EvalReport run_benchmark(const DemGrid& dem, const Hydrograph& hydrograph, const CombinedModel& cm,
                         std::span<const CellIndex> sources, const SimParams& params,
                         std::size_t radius, std::span<const std::string> ids,
                         std::size_t repeats) {
    if (sources.empty()) throw InputError("benchmark needs at least one validation source");
    if (!ids.empty() && ids.size() != sources.size())
        throw InputError("benchmark ids and sources differ in length");
    if (repeats == 0) throw InputError("benchmark repeats must be at least 1");
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    std::vector<Raster> truths, preds;
    std::vector<EvalCase> cases;
    truths.reserve(sources.size());
    preds.reserve(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        auto sim = simulate(dem, hydrograph, sources[i], params);
        std::vector<double> ca_times{sim.wall_clock};
        for (std::size_t r = 1; r < repeats; ++r)
            ca_times.push_back(simulate(dem, hydrograph, sources[i], params).wall_clock);
        auto pred = predict_map(cm, dem, sources[i], radius);
        std::vector<double> som_times{pred.wall_clock};
        for (std::size_t r = 1; r < repeats; ++r)
            som_times.push_back(predict_map(cm, dem, sources[i], radius).wall_clock);
        truths.push_back(std::move(sim.depths));
        preds.push_back(std::move(pred.depths));
        EvalCase c;
        c.id = ids.empty() ? "loc" + std::to_string(i) : ids[i];
        c.source = sources[i];
        c.ca_time = median(std::move(ca_times));
        c.som_time = median(std::move(som_times));
        cases.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
        cases[i].truth = &truths[i];
        cases[i].predicted = &preds[i];
    }
    return build_report(cases, cm.theta());
}

// ---------------------------------------------------------------------------
// formatting

namespace {

std::string printf_str(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

double no_negative_zero(double v) { return v == 0.0 ? 0.0 : v; }

std::string percent(double num, double den) {
    if (den == 0.0) return num == 0.0 ? "(0.0%)" : "(n/a)";
    return "(" + printf_str("%.1f", no_negative_zero(100.0 * num / den)) + "%)";
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string meters(double v) { return printf_str("%.3f", no_negative_zero(v)) + " m"; }

}  // namespace

std::string format_seconds(double seconds) {
    seconds = no_negative_zero(seconds);
    if (std::abs(seconds) >= 1000.0) return printf_str("%.0f", seconds) + " s";
    return printf_str("%.3g", seconds) + " s";
}

std::string format_time_delta(double ca_time, double som_time) {
    const double delta = som_time - ca_time;
    return format_seconds(delta) + " " + percent(delta, ca_time);
}

std::string format_depth_delta(double value, double reference) {
    return meters(value) + " " + percent(value, reference);
}

std::string format_report_table(const EvalReport& report) {
    constexpr std::size_t label_w = 28, time_w = 20, col_w = 18;
    std::string out;
    out += "Summary and comparison of flood model and SOM computation time and water depth "
           "results.\n";
    out += "Values in brackets represent relative differences (time: relative to the flood "
           "model; depth: relative to the flood-model statistic).\n";
    out += "Differences row: statistics of |SOM - flood model| per cell. Relative MAE = MAE / "
           "mean flood-model depth over all cells.\n";
    out += "Flood extent: cells with depth >= " + printf_str("%.3f", report.theta) + " m.\n";

    auto block = [&](const LocationReport& r, const std::string& title) {
        out += "\n" + title + "\n";
        out += pad("", label_w) + pad("Computation time", time_w) + "Water depth\n";
        out += pad("", label_w) + pad("", time_w) + pad("Minimum", col_w) + pad("Maximum", col_w) +
               pad("Mean", col_w) + "St. Dev.\n";
        auto row = [&](const std::string& label, double t, const DepthStats& s) {
            out += pad(label, label_w) + pad(format_seconds(t), time_w) + pad(meters(s.min), col_w) +
                   pad(meters(s.max), col_w) + pad(meters(s.mean), col_w) + meters(s.std) + "\n";
        };
        row("Flood model", r.ca_time, r.truth);
        row("SOM", r.som_time, r.predicted);
        out += pad("Model results differences", label_w) +
               pad(format_time_delta(r.ca_time, r.som_time), time_w) +
               pad(format_depth_delta(r.diff.min_abs, r.truth.min), col_w) +
               pad(format_depth_delta(r.diff.max_abs, r.truth.max), col_w) +
               pad(format_depth_delta(r.diff.mae, r.truth.mean), col_w) +
               format_depth_delta(r.diff.std_abs, r.truth.std) + "\n";
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "Flood extent: hits %zu, misses %zu, false alarms %zu, correct negatives "
                      "%zu, CSI %.3f\n",
                      r.extent.hits, r.extent.misses, r.extent.false_alarms,
                      r.extent.correct_negatives, r.extent.csi);
        out += buf;
    };

    block(report.aggregate, "All validation locations (" +
                                std::to_string(report.locations.size()) + "), speedup " +
                                printf_str("%.1f", report.speedup) + "x");
    for (const auto& r : report.locations)
        block(r, "Location " + r.id + " (row " + std::to_string(r.source.row) + ", col " +
                     std::to_string(r.source.col) + ")");
    return out;
}

namespace {

json stats_json(const DepthStats& s) {
    return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"std", s.std}};
}

json location_json(const LocationReport& r, bool with_timings) {
    json j{{"id", r.id},
           {"flood_model", stats_json(r.truth)},
           {"som", stats_json(r.predicted)},
           {"difference",
            {{"min_abs", r.diff.min_abs},
             {"max_abs", r.diff.max_abs},
             {"mae", r.diff.mae},
             {"relative_mae", r.diff.relative_mae ? json(*r.diff.relative_mae) : json(nullptr)},
             {"std_abs", r.diff.std_abs}}},
           {"extent",
            {{"hits", r.extent.hits},
             {"misses", r.extent.misses},
             {"false_alarms", r.extent.false_alarms},
             {"correct_negatives", r.extent.correct_negatives},
             {"csi", r.extent.csi}}}};
    if (r.id != "aggregate") j["source"] = r.source;
    if (with_timings) {
        j["ca_time"] = r.ca_time;
        j["som_time"] = r.som_time;
    }
    return j;
}

}  // namespace

json report_to_json(const EvalReport& report, bool with_timings) {
    json locs = json::array();
    for (const auto& r : report.locations) locs.push_back(location_json(r, with_timings));
    json j{{"relative_mae_definition",
            "mean |SOM - flood model| over all cells / mean flood-model depth over all cells"},
           {"theta", report.theta},
           {"validation_locations", std::move(locs)},
           {"aggregate", location_json(report.aggregate, with_timings)}};
    if (with_timings) j["speedup"] = report.speedup;
    return j;
}

json timings_to_json(const EvalReport& report) {
    json locs = json::array();
    for (const auto& r : report.locations)
        locs.push_back({{"id", r.id},
                        {"ca_time", r.ca_time},
                        {"som_time", r.som_time},
                        {"speedup", r.som_time > 0 ? r.ca_time / r.som_time : 0.0}});
    return {{"locations", std::move(locs)},
            {"mean_ca_time", report.aggregate.ca_time},
            {"mean_som_time", report.aggregate.som_time},
            {"speedup", report.speedup}};
}

}  // namespace floodsom
