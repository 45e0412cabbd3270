#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace floodsom {

/// Row/column address of a raster cell. Row 0 is the northern edge.
struct CellIndex {
    std::size_t row = 0;
    std::size_t col = 0;

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/**
 * Regular raster: header geometry plus row-major values, rows stored
 * north to south (the ASCII grid's top-first order).
 *
 * Used both for bed elevations and for water-depth fields; a DEM is a
 * Raster that additionally satisfies validate_dem().
 */
class Raster {
public:
    Raster() = default;
    Raster(std::size_t nrows, std::size_t ncols, double cell_size, double x_origin = 0.0,
           double y_origin = 0.0, double fill = 0.0);
    Raster(std::size_t nrows, std::size_t ncols, double cell_size, double x_origin, double y_origin,
           std::vector<double> values);

    std::size_t nrows() const { return nrows_; }
    std::size_t ncols() const { return ncols_; }
    std::size_t size() const { return values_.size(); }
    double cell_size() const { return cell_size_; }
    double cell_area() const { return cell_size_ * cell_size_; }
    /// Lower-left corner.
    double x_origin() const { return x_origin_; }
    double y_origin() const { return y_origin_; }

    double& at(std::size_t row, std::size_t col) { return values_[row * ncols_ + col]; }
    double at(std::size_t row, std::size_t col) const { return values_[row * ncols_ + col]; }
    double& at(CellIndex c) { return at(c.row, c.col); }
    double at(CellIndex c) const { return at(c.row, c.col); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool contains(CellIndex c) const { return c.row < nrows_ && c.col < ncols_; }
    std::size_t index(CellIndex c) const { return c.row * ncols_ + c.col; }

    /// Map x of a cell center, meters.
    double center_x(std::size_t col) const {
        return x_origin_ + (static_cast<double>(col) + 0.5) * cell_size_;
    }
    /// Map y of a cell center, meters (north-positive).
    double center_y(std::size_t row) const {
        return y_origin_ + (static_cast<double>(nrows_ - row) - 0.5) * cell_size_;
    }

    bool same_shape(const Raster& other) const {
        return nrows_ == other.nrows_ && ncols_ == other.ncols_;
    }

    /// Same shape and geometry, values replaced by `fill`.
    Raster like(double fill = 0.0) const {
        return Raster(nrows_, ncols_, cell_size_, x_origin_, y_origin_, fill);
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    double cell_size_ = 1.0;
    double x_origin_ = 0.0;
    double y_origin_ = 0.0;
    std::vector<double> values_;
};

using DemGrid = Raster;

/// Throws ConfigError unless nrows, ncols >= 3, cell_size > 0 and every elevation is finite.
void validate_dem(const Raster& dem);

struct GaussianBump {
    double x_center = 0.0;  ///< m
    double y_center = 0.0;  ///< m
    double amplitude = 0.0; ///< m, negative for depressions
    double sigma = 1.0;     ///< m
};

/**
 * Procedural terrain: tilted plane plus Gaussian bumps.
 *
 * `bumps` are used verbatim; `random_bumps` additional bumps are drawn from
 * `seed` with centers uniform over the domain, amplitudes uniform in
 * [bump_amplitude_min, bump_amplitude_max] and sigmas uniform in
 * [bump_sigma_min, bump_sigma_max].
 */
struct TerrainConfig {
    std::size_t nrows = 100;
    std::size_t ncols = 100;
    double cell_size = 20.0;
    double x_origin = 0.0;
    double y_origin = 0.0;
    double base_elevation = 10.0;
    double slope_x = 0.0;
    double slope_y = 0.0;
    std::vector<GaussianBump> bumps;
    std::size_t random_bumps = 0;
    double bump_amplitude_min = -2.0;
    double bump_amplitude_max = 1.0;
    double bump_sigma_min = 60.0;
    double bump_sigma_max = 160.0;
    std::uint64_t seed = 0;

    void validate() const;
    /// Explicit bumps followed by the seeded ones.
    std::vector<GaussianBump> resolved_bumps() const;
};

/// Closed-form surface of `cfg` at map point (x, y).
double terrain_surface(const TerrainConfig& cfg, std::span<const GaussianBump> bumps, double x,
                       double y);

DemGrid generate_synthetic_dem(const TerrainConfig& cfg);

/// ESRI ASCII grid writer. Values printed in shortest round-trip form.
void write_asc(const Raster& grid, const std::filesystem::path& path);
std::string format_asc(const Raster& grid);

/// ESRI ASCII grid reader. Throws ParseError naming the line on malformed input.
Raster read_asc(const std::filesystem::path& path);
Raster parse_asc(const std::string& text);

/**
 * Seeded rejection sampling of `n` distinct cells at least `min_separation`
 * meters apart (center to center) and at least `margin` cells away from the
 * boundary. Throws SamplingError after `max_rejections` rejected draws.
 */
std::vector<CellIndex> sample_inflow_locations(const DemGrid& grid, std::size_t n,
                                               double min_separation, std::size_t margin,
                                               std::uint64_t seed,
                                               std::size_t max_rejections = 10000);

}  // namespace floodsom
