#include "floodsom/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "distance.hpp"
#include "kdtree.hpp"
#include "floodsom/errors.hpp"
#include "floodsom/json_io.hpp"
#include "floodsom/random.hpp"

namespace floodsom {

double SomConfig::initial_sigma() const {
    return sigma0 > 0.0 ? sigma0 : static_cast<double>(std::max(rows, cols)) / 2.0;
}

double SomConfig::sigma_at(std::size_t epoch) const {
    const double s0 = initial_sigma();
    if (epochs <= 1) return s0;
    const double f = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    return s0 + (sigma_final - s0) * f;
}

void SomConfig::validate() const {
    if (rows < 1 || cols < 1) throw ConfigError("SOM needs at least one row and column");
    if (epochs < 1) throw ConfigError("SOM needs at least one epoch");
    if (!(sigma_final > 0.0)) throw ConfigError("sigma_final must be positive");
    if (initial_sigma() < sigma_final) throw ConfigError("sigma0 must be >= sigma_final");
    if (init != "sample") throw ConfigError("unsupported SOM init '" + init + "'");
}

SomModel::SomModel(SomConfig config, std::size_t feature_dim, NormStats norm_stats,
                   std::vector<double> codebook)
    : config_(std::move(config)), feature_dim_(feature_dim), norm_stats_(std::move(norm_stats)),
      codebook_(std::move(codebook)) {
    if (codebook_.size() != node_count() * stride())
        throw InputError("codebook size does not match map geometry");
    for (double v : codebook_)
        if (!std::isfinite(v)) throw InputError("codebook contains a non-finite value");
}

SomModel init_som(const SomConfig& cfg, const Dataset& ds) {
    cfg.validate();
    if (ds.empty()) throw InputError("cannot initialise a SOM from an empty dataset");
    const std::size_t stride = ds.feature_dim + 1;
    std::vector<double> codebook(cfg.rows * cfg.cols * stride);
    SplitMix64 rng(cfg.seed);
    for (std::size_t node = 0; node < cfg.rows * cfg.cols; ++node) {
        const auto& s = ds.samples[rng.below(ds.size())];
        std::copy(s.features.begin(), s.features.end(), codebook.begin() + node * stride);
        codebook[node * stride + ds.feature_dim] = s.depth;
    }
    return SomModel(cfg, ds.feature_dim, ds.norm_stats, std::move(codebook));
}

namespace {

std::size_t bmu_raw(const double* codebook, std::size_t nodes, std::size_t stride,
                    const double* query, std::size_t dim) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes; ++i) {
        const double d = detail::squared_distance_bounded(codebook + i * stride, query, dim, best_d);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

void check_dims(const SomModel& model, const Dataset& ds) {
    if (ds.empty()) throw InputError("dataset is empty");
    if (ds.feature_dim != model.feature_dim())
        throw InputError("dataset feature_dim " + std::to_string(ds.feature_dim) +
                         " does not match model feature_dim " +
                         std::to_string(model.feature_dim()));
}

/// Sample indices ordered by (features, depth) lexicographically.
std::vector<std::size_t> canonical_order(const Dataset& ds) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& sa = ds.samples[a];
        const auto& sb = ds.samples[b];
        for (std::size_t j = 0; j < ds.feature_dim; ++j)
            if (sa.features[j] != sb.features[j]) return sa.features[j] < sb.features[j];
        return sa.depth < sb.depth;
    });
    return order;
}

}  // namespace

std::size_t bmu(const SomModel& model, std::span<const double> features) {
    if (features.size() != model.feature_dim())
        throw InputError("query has " + std::to_string(features.size()) + " features, model has " +
                         std::to_string(model.feature_dim()));
    return bmu_raw(model.codebook().data(), model.node_count(), model.stride(), features.data(),
                   model.feature_dim());
}

SomModel train_batch(const SomModel& model, const Dataset& ds, const SomConfig& cfg) {
    cfg.validate();
    check_dims(model, ds);
    if (cfg.rows != model.rows() || cfg.cols != model.cols())
        throw InputError("SOM config geometry does not match the model");

    const std::size_t nodes = model.node_count();
    const std::size_t dim = model.feature_dim();
    const std::size_t stride = model.stride();
    const auto order = canonical_order(ds);

    const std::size_t rows = cfg.rows, cols = cfg.cols;
    // the Gaussian neighbourhood factorises over lattice rows and columns, so the
    // update is two 1-D passes; channel `stride` carries the hit counts
    const std::size_t ch = stride + 1;
    std::vector<double> codebook(model.codebook().begin(), model.codebook().end());
    std::vector<double> acc(nodes * ch), pass(nodes * ch), smooth(nodes * ch);
    std::vector<double> g(std::max(rows, cols));
    std::vector<detail::Hit> hit;
    // last epoch's winner per sample seeds the search
    std::vector<std::size_t> last(ds.size(), nodes);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const detail::KdTree tree(codebook.data(), nodes, dim, stride);
        for (std::size_t idx : order) {
            const auto& s = ds.samples[idx];
            tree.knn(s.features.data(), 1, std::span<const std::size_t>(&last[idx], 1), hit);
            last[idx] = hit.front().index;
            double* a = acc.data() + hit.front().index * ch;
            for (std::size_t j = 0; j < dim; ++j) a[j] += s.features[j];
            a[dim] += s.depth;
            a[stride] += 1.0;
        }

        const double sigma = cfg.sigma_at(epoch);
        const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
        for (std::size_t d = 0; d < g.size(); ++d)
            g[d] = std::exp(-static_cast<double>(d * d) * inv_two_sigma2);
        auto gap = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };

        std::fill(pass.begin(), pass.end(), 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                double* out = pass.data() + (r * cols + c) * ch;
                for (std::size_t c2 = 0; c2 < cols; ++c2) {
                    const double* in = acc.data() + (r * cols + c2) * ch;
                    if (in[stride] == 0.0) continue;
                    const double w = g[gap(c, c2)];
                    for (std::size_t j = 0; j < ch; ++j) out[j] += w * in[j];
                }
            }
        std::fill(smooth.begin(), smooth.end(), 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t r2 = 0; r2 < rows; ++r2) {
                const double w = g[gap(r, r2)];
                for (std::size_t c = 0; c < cols; ++c) {
                    const double* in = pass.data() + (r2 * cols + c) * ch;
                    if (in[stride] == 0.0) continue;
                    double* out = smooth.data() + (r * cols + c) * ch;
                    for (std::size_t j = 0; j < ch; ++j) out[j] += w * in[j];
                }
            }
        for (std::size_t node = 0; node < nodes; ++node) {
            const double* sm = smooth.data() + node * ch;
            const double denom = sm[stride];
            if (!(denom > 0.0)) continue;  // no weight reached this node: keep it
            double* out = codebook.data() + node * stride;
            for (std::size_t j = 0; j < stride; ++j) out[j] = sm[j] / denom;
        }
    }
    return SomModel(cfg, dim, model.norm_stats(), std::move(codebook));
}

SomModel train_som(const SomConfig& cfg, const Dataset& ds) {
    return train_batch(init_som(cfg, ds), ds, cfg);
}

double quantization_error(const SomModel& model, const Dataset& ds) {
    check_dims(model, ds);
    const detail::KdTree tree(model.codebook().data(), model.node_count(), model.feature_dim(),
                              model.stride());
    std::vector<detail::Hit> hit;
    double total = 0.0;
    for (const auto& s : ds.samples) {
        tree.knn(s.features.data(), 1, hit);
        total += std::sqrt(hit.front().dist2);
    }
    return total / static_cast<double>(ds.size());
}

// ---------------------------------------------------------------------------

namespace {

json config_to_json(const SomConfig& c) {
    return {{"rows", c.rows},     {"cols", c.cols},       {"epochs", c.epochs},
            {"sigma0", c.sigma0}, {"sigma_final", c.sigma_final}, {"seed", c.seed},
            {"init", c.init}};
}

SomConfig config_from_json(const json& j) {
    SomConfig c;
    c.rows = j.at("rows").get<std::size_t>();
    c.cols = j.at("cols").get<std::size_t>();
    c.epochs = j.value("epochs", c.epochs);
    c.sigma0 = j.value("sigma0", c.sigma0);
    c.sigma_final = j.value("sigma_final", c.sigma_final);
    c.seed = j.value("seed", c.seed);
    c.init = j.value("init", c.init);
    return c;
}

}  // namespace

void save_som(const SomModel& model, const std::filesystem::path& path) {
    json nodes = json::array();
    for (std::size_t i = 0; i < model.node_count(); ++i) {
        auto n = model.node(i);
        nodes.push_back(std::vector<double>(n.begin(), n.end()));
    }
    json j{{"rows", model.rows()},
           {"cols", model.cols()},
           {"feature_dim", model.feature_dim()},
           {"config", config_to_json(model.config())},
           {"norm_stats", model.norm_stats()},
           {"codebook", std::move(nodes)}};
    write_json_file(j, path);
}

SomModel load_som(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    try {
        SomConfig cfg = config_from_json(j.at("config"));
        const auto dim = j.at("feature_dim").get<std::size_t>();
        std::vector<double> codebook;
        for (const auto& node : j.at("codebook")) {
            auto v = node.get<std::vector<double>>();
            if (v.size() != dim + 1) throw ParseError("codebook node has the wrong length");
            codebook.insert(codebook.end(), v.begin(), v.end());
        }
        return SomModel(cfg, dim, j.at("norm_stats").get<NormStats>(), std::move(codebook));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace floodsom
