#include "floodsom/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "distance.hpp"
#include "kdtree.hpp"
#include "floodsom/errors.hpp"
#include "floodsom/json_io.hpp"

namespace floodsom {

namespace {

std::string content_hash(std::span<const double> features, std::span<const double> depths,
                         std::size_t k, double theta) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001B3ULL;
        }
    };
    mix(features.data(), features.size_bytes());
    mix(depths.data(), depths.size_bytes());
    mix(&k, sizeof k);
    mix(&theta, sizeof theta);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

CombinedModel::CombinedModel(std::size_t feature_dim, std::vector<double> pool_features,
                             std::vector<double> pool_depths, std::vector<Origin> origins,
                             std::size_t k, double theta, NormStats norm_stats,
                             std::size_t feature_radius)
    : feature_dim_(feature_dim), features_(std::move(pool_features)),
      depths_(std::move(pool_depths)), origins_(std::move(origins)), k_(k), theta_(theta),
      norm_stats_(std::move(norm_stats)), feature_radius_(feature_radius) {
    if (feature_dim_ == 0) throw InputError("feature_dim must be positive");
    if (k_ < 1) throw InputError("k must be at least 1");
    if (features_.size() != depths_.size() * feature_dim_ || origins_.size() != depths_.size())
        throw InputError("pool arrays have inconsistent lengths");
    if (norm_stats_.dim() != feature_dim_)
        throw InputError("normalization stats do not match feature_dim");
    for (std::size_t i = 0; i < depths_.size(); ++i) {
        if (!(depths_[i] >= 0.0) || !std::isfinite(depths_[i]))
            throw InputError("pooled depths must be finite and non-negative");
        if (origins_[i] == Origin::zero && depths_[i] != 0.0)
            throw InputError("zero-class pool entry has a nonzero depth");
    }
    id_ = content_hash(features_, depths_, k_, theta_);
    index_ = std::make_shared<const detail::KdTree>(features_.data(), depths_.size(), feature_dim_,
                                                    feature_dim_);
}

CombinedModel CombinedModel::with_k(std::size_t k) const {
    return CombinedModel(feature_dim_, features_, depths_, origins_, k, theta_, norm_stats_,
                         feature_radius_);
}

CombinedModel combine(const SomModel& zero_som, const SomModel& wet_som, std::size_t k,
                      double theta, std::size_t feature_radius) {
    if (zero_som.feature_dim() != wet_som.feature_dim())
        throw InputError("cannot combine maps with different feature_dim");
    if (!(zero_som.norm_stats() == wet_som.norm_stats()))
        throw InputError("cannot combine maps trained under different normalizations");
    const std::size_t dim = zero_som.feature_dim();
    std::vector<double> features;
    std::vector<double> depths;
    std::vector<Origin> origins;
    for (const auto* som : {&zero_som, &wet_som}) {
        const Origin tag = som == &zero_som ? Origin::zero : Origin::wet;
        for (std::size_t i = 0; i < som->node_count(); ++i) {
            auto f = som->features(i);
            features.insert(features.end(), f.begin(), f.end());
            depths.push_back(som->depth(i));
            origins.push_back(tag);
        }
    }
    return CombinedModel(dim, std::move(features), std::move(depths), std::move(origins), k, theta,
                         zero_som.norm_stats(), feature_radius);
}

std::vector<Neighbor> k_nearest(const CombinedModel& cm, std::span<const double> query,
                                std::size_t k) {
    if (query.size() != cm.feature_dim())
        throw InputError("query length does not match the model's feature_dim");
    if (k < 1 || k > cm.size())
        throw InputError("k = " + std::to_string(k) + " is outside [1, pool size " +
                         std::to_string(cm.size()) + "]");
    std::vector<detail::Hit> hits;
    cm.index()->knn(query.data(), k, hits);
    std::vector<Neighbor> best;
    best.reserve(hits.size());
    for (const auto& h : hits) best.push_back({h.index, h.dist2});
    return best;
}

namespace {

template <class NN>
double predict_from_neighbors(const CombinedModel& cm, const std::vector<NN>& nn) {
    double value;
    const double nearest = std::sqrt(nn.front().dist2);
    if (nearest < 1e-12) {
        value = cm.depth(nn.front().index);
    } else {
        double num = 0.0, den = 0.0;
        for (const auto& n : nn) {
            const double w = 1.0 / std::sqrt(n.dist2);
            num += w * cm.depth(n.index);
            den += w;
        }
        value = num / den;
    }
    return value < cm.theta() ? 0.0 : value;
}

}  // namespace

double predict_depth(const CombinedModel& cm, std::span<const double> features) {
    return predict_from_neighbors(cm, k_nearest(cm, features, cm.k()));
}

PredictionResult predict_map(const CombinedModel& cm, const DemGrid& dem, CellIndex source,
                             std::size_t radius) {
    if (!dem.contains(source)) throw InputError("source cell is outside the grid");
    if (cm.feature_radius() != 0 && cm.feature_radius() != radius)
        throw InputError("feature radius " + std::to_string(radius) +
                         " differs from the model's " + std::to_string(cm.feature_radius()));
    if (feature_dim_for_radius(radius) != cm.feature_dim())
        throw InputError("feature radius does not match the model's feature_dim");
    if (cm.k() > cm.size()) throw InputError("model k exceeds its pool size");

    const auto start = std::chrono::steady_clock::now();
    PredictionResult result{dem.like(0.0), source, 0.0, cm.id()};
    std::vector<double> buf(cm.feature_dim());
    std::vector<detail::Hit> hits;
    std::vector<std::size_t> seeds;  // previous cell's neighbours: adjacent queries are close
    for (std::size_t r = 0; r < dem.nrows(); ++r) {
        for (std::size_t c = 0; c < dem.ncols(); ++c) {
            extract_features_into(dem, source, {r, c}, radius, buf);
            apply_normalization_into(cm.norm_stats(), buf);
            cm.index()->knn(buf.data(), cm.k(), seeds, hits);
            result.depths.at(r, c) = predict_from_neighbors(cm, hits);
            seeds.clear();
            for (const auto& h : hits) seeds.push_back(h.index);
        }
    }
    result.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ---------------------------------------------------------------------------

void save_combined(const CombinedModel& cm, const std::filesystem::path& path) {
    json pool = json::array();
    for (std::size_t i = 0; i < cm.size(); ++i) {
        auto f = cm.features(i);
        pool.push_back({{"features", std::vector<double>(f.begin(), f.end())},
                        {"depth", cm.depth(i)},
                        {"origin", cm.origin(i) == Origin::zero ? "zero" : "wet"}});
    }
    json j{{"model_id", cm.id()},       {"k", cm.k()},
           {"theta", cm.theta()},       {"feature_dim", cm.feature_dim()},
           {"feature_radius", cm.feature_radius()}, {"norm_stats", cm.norm_stats()},
           {"pool", std::move(pool)}};
    write_json_file(j, path);
}

CombinedModel load_combined(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    try {
        const auto dim = j.at("feature_dim").get<std::size_t>();
        std::vector<double> features, depths;
        std::vector<Origin> origins;
        for (const auto& e : j.at("pool")) {
            auto f = e.at("features").get<std::vector<double>>();
            if (f.size() != dim) throw ParseError("pool entry has the wrong feature count");
            features.insert(features.end(), f.begin(), f.end());
            depths.push_back(e.at("depth").get<double>());
            const auto tag = e.at("origin").get<std::string>();
            if (tag != "zero" && tag != "wet") throw ParseError("unknown origin '" + tag + "'");
            origins.push_back(tag == "zero" ? Origin::zero : Origin::wet);
        }
        return CombinedModel(dim, std::move(features), std::move(depths), std::move(origins),
                             j.at("k").get<std::size_t>(), j.at("theta").get<double>(),
                             j.at("norm_stats").get<NormStats>(),
                             j.value("feature_radius", std::size_t{0}));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace floodsom
