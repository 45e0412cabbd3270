#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "floodsom/features.hpp"

namespace floodsom {

struct SomConfig {
    std::size_t rows = 10;
    std::size_t cols = 10;
    std::size_t epochs = 30;
    /// Initial neighbourhood radius in node units; <= 0 selects max(rows, cols) / 2.
    double sigma0 = 0.0;
    double sigma_final = 0.5;
    std::uint64_t seed = 0;
    std::string init = "sample";

    double initial_sigma() const;
    /// Linear decay from initial_sigma() at epoch 0 to sigma_final at the last epoch.
    double sigma_at(std::size_t epoch) const;
    void validate() const;

    friend bool operator==(const SomConfig&, const SomConfig&) = default;
};

/**
 * Rectangular Kohonen map whose nodes hold a feature part (normalized space)
 * followed by a depth part (meters). Node (r, c) has index r * cols + c.
 */
class SomModel {
public:
    SomModel() = default;
    SomModel(SomConfig config, std::size_t feature_dim, NormStats norm_stats,
             std::vector<double> codebook);

    std::size_t rows() const { return config_.rows; }
    std::size_t cols() const { return config_.cols; }
    std::size_t node_count() const { return config_.rows * config_.cols; }
    std::size_t feature_dim() const { return feature_dim_; }
    /// feature_dim() + 1
    std::size_t stride() const { return feature_dim_ + 1; }

    const SomConfig& config() const { return config_; }
    const NormStats& norm_stats() const { return norm_stats_; }

    std::span<const double> node(std::size_t i) const {
        return std::span<const double>(codebook_).subspan(i * stride(), stride());
    }
    std::span<const double> features(std::size_t i) const { return node(i).first(feature_dim_); }
    double depth(std::size_t i) const { return codebook_[i * stride() + feature_dim_]; }

    std::span<const double> codebook() const { return codebook_; }
    std::span<double> codebook() { return codebook_; }

    friend bool operator==(const SomModel&, const SomModel&) = default;

private:
    SomConfig config_;
    std::size_t feature_dim_ = 0;
    NormStats norm_stats_;
    std::vector<double> codebook_;
};

/// Each node copies a sample (features and depth) drawn uniformly with cfg.seed.
SomModel init_som(const SomConfig& cfg, const Dataset& ds);

/// Best-matching unit on the feature part only; ties go to the lowest index.
std::size_t bmu(const SomModel& model, std::span<const double> features);

/**
 * Batch Kohonen training with input-only matching. Each epoch every node
 * becomes the neighbourhood-weighted mean of all full sample vectors
 * (features and depth):
 *
 *   w_j = sum_s h(bmu(s), j) x_s / sum_s h(bmu(s), j),  h = exp(-|r_bmu - r_j|^2 / (2 sigma^2))
 *
 * Nodes whose total weight underflows to zero keep their vector. Samples are
 * accumulated in a canonical (lexicographic) order, so the result is
 * bit-identical for any ordering of ds.
 */
SomModel train_batch(const SomModel& model, const Dataset& ds, const SomConfig& cfg);

/// init_som followed by train_batch.
SomModel train_som(const SomConfig& cfg, const Dataset& ds);

/// Mean feature-space Euclidean distance from each sample to its BMU.
double quantization_error(const SomModel& model, const Dataset& ds);

void save_som(const SomModel& model, const std::filesystem::path& path);
SomModel load_som(const std::filesystem::path& path);

}  // namespace floodsom
