#include "floodsom/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "floodsom/errors.hpp"
#include "floodsom/numfmt.hpp"
#include "floodsom/random.hpp"

namespace floodsom {

Raster::Raster(std::size_t nrows, std::size_t ncols, double cell_size, double x_origin,
               double y_origin, double fill)
    : Raster(nrows, ncols, cell_size, x_origin, y_origin,
             std::vector<double>(nrows * ncols, fill)) {}

Raster::Raster(std::size_t nrows, std::size_t ncols, double cell_size, double x_origin,
               double y_origin, std::vector<double> values)
    : nrows_(nrows), ncols_(ncols), cell_size_(cell_size), x_origin_(x_origin),
      y_origin_(y_origin), values_(std::move(values)) {
    if (nrows == 0 || ncols == 0) throw InputError("raster dimensions must be positive");
    if (!(cell_size > 0.0)) throw InputError("raster cell size must be positive");
    if (values_.size() != nrows * ncols)
        throw InputError("raster value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(nrows) + "x" +
                         std::to_string(ncols));
}

void validate_dem(const Raster& dem) {
    if (dem.nrows() < 3 || dem.ncols() < 3)
        throw ConfigError("DEM must have at least 3 rows and 3 columns");
    if (!(dem.cell_size() > 0.0)) throw ConfigError("DEM cell size must be positive");
    for (double z : dem.values())
        if (!std::isfinite(z)) throw ConfigError("DEM contains a non-finite elevation");
}

void TerrainConfig::validate() const {
    if (nrows < 3 || ncols < 3) throw ConfigError("terrain needs at least 3x3 cells");
    if (!(cell_size > 0.0)) throw ConfigError("terrain cell_size must be positive");
    for (const auto& b : bumps)
        if (!(b.sigma > 0.0)) throw ConfigError("bump sigma must be positive");
    if (random_bumps > 0) {
        if (!(bump_sigma_min > 0.0) || bump_sigma_max < bump_sigma_min)
            throw ConfigError("random bump sigma range must be positive and ordered");
        if (bump_amplitude_max < bump_amplitude_min)
            throw ConfigError("random bump amplitude range is reversed");
    }
}

std::vector<GaussianBump> TerrainConfig::resolved_bumps() const {
    std::vector<GaussianBump> out = bumps;
    SplitMix64 rng(seed);
    const double width = static_cast<double>(ncols) * cell_size;
    const double height = static_cast<double>(nrows) * cell_size;
    for (std::size_t i = 0; i < random_bumps; ++i) {
        GaussianBump b;
        b.x_center = x_origin + rng.uniform(0.0, width);
        b.y_center = y_origin + rng.uniform(0.0, height);
        b.amplitude = rng.uniform(bump_amplitude_min, bump_amplitude_max);
        b.sigma = rng.uniform(bump_sigma_min, bump_sigma_max);
        out.push_back(b);
    }
    return out;
}

double terrain_surface(const TerrainConfig& cfg, std::span<const GaussianBump> bumps, double x,
                       double y) {
    double z = cfg.base_elevation + cfg.slope_x * x + cfg.slope_y * y;
    for (const auto& b : bumps) {
        const double dx = x - b.x_center;
        const double dy = y - b.y_center;
        z += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
    }
    return z;
}

DemGrid generate_synthetic_dem(const TerrainConfig& cfg) {
    cfg.validate();
    const auto bumps = cfg.resolved_bumps();
    DemGrid dem(cfg.nrows, cfg.ncols, cfg.cell_size, cfg.x_origin, cfg.y_origin);
    for (std::size_t r = 0; r < dem.nrows(); ++r)
        for (std::size_t c = 0; c < dem.ncols(); ++c)
            dem.at(r, c) = terrain_surface(cfg, bumps, dem.center_x(c), dem.center_y(r));
    return dem;
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid

std::string format_asc(const Raster& grid) {
    std::string out;
    out.reserve(grid.size() * 8 + 128);
    out += "ncols " + std::to_string(grid.ncols()) + '\n';
    out += "nrows " + std::to_string(grid.nrows()) + '\n';
    out += "xllcorner " + format_number(grid.x_origin()) + '\n';
    out += "yllcorner " + format_number(grid.y_origin()) + '\n';
    out += "cellsize " + format_number(grid.cell_size()) + '\n';
    out += "NODATA_value -9999\n";
    for (std::size_t r = 0; r < grid.nrows(); ++r) {
        for (std::size_t c = 0; c < grid.ncols(); ++c) {
            if (c) out += ' ';
            append_number(out, grid.at(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_asc(const Raster& grid, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << format_asc(grid);
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

}  // namespace

Raster parse_asc(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;

    static const char* const required[] = {"ncols", "nrows", "xllcorner", "yllcorner",
                                           "cellsize"};
    double header[5] = {};
    for (int i = 0; i < 5; ++i) {
        if (!std::getline(in, line)) parse_fail(lineno + 1, "unexpected end of header");
        ++lineno;
        auto tokens = split_ws(line);
        if (tokens.size() != 2 || lower(tokens[0]) != required[i])
            parse_fail(lineno, std::string("expected '") + required[i] + " <value>'");
        auto v = parse_number(tokens[1]);
        if (!v) parse_fail(lineno, "non-numeric header value '" + tokens[1] + "'");
        header[i] = *v;
    }
    const double ncols_d = header[0], nrows_d = header[1];
    if (ncols_d < 1 || nrows_d < 1 || ncols_d != std::floor(ncols_d) ||
        nrows_d != std::floor(nrows_d))
        parse_fail(1, "ncols/nrows must be positive integers");
    if (!(header[4] > 0)) parse_fail(5, "cellsize must be positive");
    const auto ncols = static_cast<std::size_t>(ncols_d);
    const auto nrows = static_cast<std::size_t>(nrows_d);

    std::optional<double> nodata;
    std::vector<double> values;
    values.reserve(nrows * ncols);
    std::size_t row = 0;
    bool header_done = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (!header_done) {
            header_done = true;
            if (lower(tokens[0]) == "nodata_value") {
                if (tokens.size() != 2) parse_fail(lineno, "malformed NODATA_value line");
                nodata = parse_number(tokens[1]);
                if (!nodata) parse_fail(lineno, "non-numeric NODATA_value");
                continue;
            }
        }
        if (row >= nrows) parse_fail(lineno, "more data rows than nrows");
        if (tokens.size() != ncols)
            parse_fail(lineno, "row has " + std::to_string(tokens.size()) + " values, expected " +
                                   std::to_string(ncols));
        for (const auto& tok : tokens) {
            auto v = parse_number(tok);
            if (!v) parse_fail(lineno, "non-numeric token '" + tok + "'");
            if (nodata && *v == *nodata) parse_fail(lineno, "NODATA cell inside the domain");
            values.push_back(*v);
        }
        ++row;
    }
    if (row != nrows)
        parse_fail(lineno, "found " + std::to_string(row) + " data rows, expected " +
                               std::to_string(nrows));
    return Raster(nrows, ncols, header[4], header[2], header[3], std::move(values));
}

Raster read_asc(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("missing file: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return parse_asc(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::vector<CellIndex> sample_inflow_locations(const DemGrid& grid, std::size_t n,
                                               double min_separation, std::size_t margin,
                                               std::uint64_t seed,
                                               std::size_t max_rejections) {
    std::vector<CellIndex> out;
    if (n == 0) return out;
    if (2 * margin >= grid.nrows() || 2 * margin >= grid.ncols())
        throw SamplingError("margin leaves no interior cells");
    const std::size_t rows = grid.nrows() - 2 * margin;
    const std::size_t cols = grid.ncols() - 2 * margin;
    const double cs = grid.cell_size();
    const double min_sep2 = min_separation * min_separation;

    SplitMix64 rng(seed);
    std::size_t rejections = 0;
    while (out.size() < n) {
        CellIndex c{margin + rng.below(rows), margin + rng.below(cols)};
        bool ok = true;
        for (const auto& p : out) {
            const double dr = (static_cast<double>(p.row) - static_cast<double>(c.row)) * cs;
            const double dc = (static_cast<double>(p.col) - static_cast<double>(c.col)) * cs;
            // distinctness is implied when min_separation > 0; check it anyway for 0
            if (p == c || dr * dr + dc * dc < min_sep2) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.push_back(c);
        } else if (++rejections > max_rejections) {
            throw SamplingError("could not place " + std::to_string(n) + " locations " +
                                std::to_string(min_separation) + " m apart after " +
                                std::to_string(max_rejections) + " rejections");
        }
    }
    return out;
}

}  // namespace floodsom
