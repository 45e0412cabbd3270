#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "floodsom/features.hpp"
#include "floodsom/som.hpp"
#include "floodsom/terrain.hpp"

namespace floodsom {

namespace detail {
class KdTree;
}

enum class Origin { zero, wet };

/**
 * Codebooks of the dry-class and wet-class maps pooled into one KNN
 * reference set. Pool order is every zero-map node, then every wet-map node.
 */
class CombinedModel {
public:
    CombinedModel() = default;
    CombinedModel(std::size_t feature_dim, std::vector<double> pool_features,
                  std::vector<double> pool_depths, std::vector<Origin> origins, std::size_t k,
                  double theta, NormStats norm_stats, std::size_t feature_radius = 0);

    std::size_t size() const { return depths_.size(); }
    std::size_t feature_dim() const { return feature_dim_; }
    std::size_t k() const { return k_; }
    double theta() const { return theta_; }
    /// Patch radius the features were built with; 0 when unknown.
    std::size_t feature_radius() const { return feature_radius_; }
    const NormStats& norm_stats() const { return norm_stats_; }
    /// Content hash, stable across save/load.
    const std::string& id() const { return id_; }

    std::span<const double> features(std::size_t i) const {
        return std::span<const double>(features_).subspan(i * feature_dim_, feature_dim_);
    }
    double depth(std::size_t i) const { return depths_[i]; }
    Origin origin(std::size_t i) const { return origins_[i]; }
    std::span<const double> pool_features() const { return features_; }

    /// Same pool with a different neighbour count.
    CombinedModel with_k(std::size_t k) const;

    /// Search index over the pool; null for a default-constructed model.
    const detail::KdTree* index() const { return index_.get(); }

    friend bool operator==(const CombinedModel& a, const CombinedModel& b) {
        return a.feature_dim_ == b.feature_dim_ && a.features_ == b.features_ &&
               a.depths_ == b.depths_ && a.origins_ == b.origins_ && a.k_ == b.k_ &&
               a.theta_ == b.theta_ && a.norm_stats_ == b.norm_stats_ &&
               a.feature_radius_ == b.feature_radius_;
    }

private:
    std::size_t feature_dim_ = 0;
    std::vector<double> features_;
    std::vector<double> depths_;
    std::vector<Origin> origins_;
    std::size_t k_ = 5;
    double theta_ = 0.03;
    NormStats norm_stats_;
    std::size_t feature_radius_ = 0;
    std::string id_;
    std::shared_ptr<const detail::KdTree> index_;
};

/// Throws InputError on feature_dim or normalization mismatch, or a nonzero zero-map depth.
CombinedModel combine(const SomModel& zero_som, const SomModel& wet_som, std::size_t k = 5,
                      double theta = 0.03, std::size_t feature_radius = 0);

struct Neighbor {
    std::size_t index = 0;
    double dist2 = 0.0;  ///< squared Euclidean distance

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The k pool entries closest to `query`, ordered by (distance, index).
std::vector<Neighbor> k_nearest(const CombinedModel& cm, std::span<const double> query,
                                std::size_t k);

/**
 * Inverse-distance weighted depth of the k nearest pooled entries, or the
 * nearest entry's depth when it lies within 1e-12. Results below theta
 * become 0. `features` must already be normalized with cm's stats.
 */
double predict_depth(const CombinedModel& cm, std::span<const double> features);

struct PredictionResult {
    Raster depths;
    CellIndex source;
    double wall_clock = 0.0;  ///< s
    std::string model_id;
};

PredictionResult predict_map(const CombinedModel& cm, const DemGrid& dem, CellIndex source,
                             std::size_t radius);

void save_combined(const CombinedModel& cm, const std::filesystem::path& path);
CombinedModel load_combined(const std::filesystem::path& path);

}  // namespace floodsom
