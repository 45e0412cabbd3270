#include <doctest.h>

#include <cmath>
#include <set>

#include "floodsom/errors.hpp"
#include "floodsom/terrain.hpp"
#include "test_util.hpp"

using namespace floodsom;

TEST_SUITE("terrain") {

TEST_CASE("flat configuration gives the base elevation everywhere") {
    TerrainConfig cfg;
    cfg.nrows = 7;
    cfg.ncols = 9;
    cfg.base_elevation = 10.0;
    const auto dem = generate_synthetic_dem(cfg);
    CHECK(dem.nrows() == 7);
    CHECK(dem.ncols() == 9);
    for (double z : dem.values()) CHECK(z == 10.0);
}

TEST_CASE("bump centred on a cell centre lowers that cell by its amplitude") {
    TerrainConfig cfg;
    cfg.nrows = 5;
    cfg.ncols = 5;
    cfg.cell_size = 20.0;
    cfg.bumps.push_back({50.0, 50.0, -2.0, 40.0});
    const auto dem = generate_synthetic_dem(cfg);
    CHECK(dem.at(2, 2) == 8.0);
    // neighbours sit one cell (20 m) away
    CHECK(dem.at(1, 2) == doctest::Approx(10.0 - 2.0 * std::exp(-400.0 / 3200.0)).epsilon(1e-14));
}

TEST_CASE("cell values match the closed-form surface at cell centres") {
    for (std::uint64_t seed : {1u, 7u, 2018u}) {
        TerrainConfig cfg;
        cfg.nrows = 23;
        cfg.ncols = 31;
        cfg.cell_size = 12.5;
        cfg.x_origin = 1000.0;
        cfg.y_origin = -200.0;
        cfg.slope_x = 0.003;
        cfg.slope_y = -0.001;
        cfg.random_bumps = 6;
        cfg.seed = seed;
        const auto bumps = cfg.resolved_bumps();
        REQUIRE(bumps.size() == 6);
        const auto dem = generate_synthetic_dem(cfg);
        for (std::size_t r = 0; r < cfg.nrows; ++r)
            for (std::size_t c = 0; c < cfg.ncols; ++c) {
                // independent evaluation: centre of (r, c), rows counted from the north
                const double x = 1000.0 + (static_cast<double>(c) + 0.5) * 12.5;
                const double y = -200.0 + (23.0 - static_cast<double>(r) - 0.5) * 12.5;
                double z = 10.0 + 0.003 * x - 0.001 * y;
                for (const auto& b : bumps)
                    z += b.amplitude * std::exp(-((x - b.x_center) * (x - b.x_center) +
                                                  (y - b.y_center) * (y - b.y_center)) /
                                                (2.0 * b.sigma * b.sigma));
                CHECK(std::abs(dem.at(r, c) - z) <= 1e-12);
            }
    }
}

TEST_CASE("random bumps respect their ranges and the seed") {
    TerrainConfig cfg;
    cfg.random_bumps = 50;
    cfg.seed = 3;
    cfg.bump_amplitude_min = -3.0;
    cfg.bump_amplitude_max = -2.0;
    cfg.bump_sigma_min = 300.0;
    cfg.bump_sigma_max = 450.0;
    const auto a = cfg.resolved_bumps();
    for (const auto& b : a) {
        CHECK(b.amplitude >= -3.0);
        CHECK(b.amplitude <= -2.0);
        CHECK(b.sigma >= 300.0);
        CHECK(b.sigma <= 450.0);
        CHECK(b.x_center >= 0.0);
        CHECK(b.x_center <= 2000.0);
    }
    CHECK(generate_synthetic_dem(cfg) == generate_synthetic_dem(cfg));
    auto other = cfg;
    other.seed = 4;
    CHECK_FALSE(generate_synthetic_dem(cfg) == generate_synthetic_dem(other));
}

TEST_CASE("invalid terrain configurations are rejected") {
    TerrainConfig cfg;
    cfg.nrows = 2;
    CHECK_THROWS_AS(generate_synthetic_dem(cfg), ConfigError);
    cfg = {};
    cfg.cell_size = 0.0;
    CHECK_THROWS_AS(generate_synthetic_dem(cfg), ConfigError);
    cfg = {};
    cfg.random_bumps = 1;
    cfg.bump_sigma_min = -1.0;
    CHECK_THROWS_AS(generate_synthetic_dem(cfg), ConfigError);
}

TEST_CASE("2x2 grid writes the exact ESRI text") {
    Raster g(2, 2, 20.0, 0.0, 0.0, std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(format_asc(g) ==
          "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 20\nNODATA_value -9999\n"
          "1 2\n3 4\n");
}

TEST_CASE("ESRI text round-trips bit-exactly") {
    auto dem = testutil::random_dem(17, 13, 7.3, 99);
    dem.at(0, 0) = 0.1 + 0.2;
    dem.at(3, 4) = -1e-300;
    const auto back = parse_asc(format_asc(dem));
    CHECK(back == dem);

    testutil::TempDir tmp("asc");
    write_asc(dem, tmp.path() / "d.asc");
    CHECK(read_asc(tmp.path() / "d.asc") == dem);
}

TEST_CASE("header keys are case-insensitive and NODATA is optional") {
    const auto g = parse_asc("NCOLS 3\nNROWS 1\nXLLCORNER 5\nYLLCORNER 6\nCELLSIZE 2\n1 2 3\n");
    CHECK(g.ncols() == 3);
    CHECK(g.x_origin() == 5.0);
    CHECK(g.at(0, 2) == 3.0);
}

TEST_CASE("malformed ESRI text raises a ParseError naming the line") {
    auto message = [](const std::string& text) {
        try {
            parse_asc(text);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    // missing ncols: the first header line is nrows
    CHECK(message("nrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 4\n").find("line 1") !=
          std::string::npos);
    CHECK(message("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3\n")
              .find("line 7") != std::string::npos);
    CHECK(message("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 x\n3 4\n")
              .find("line 6") != std::string::npos);
    CHECK(message("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n")
              .find("expected 2") != std::string::npos);
    CHECK(message("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n"
                  "1 -9999\n")
              .find("line 7") != std::string::npos);
}

TEST_CASE("missing file is reported") {
    CHECK_THROWS(read_asc("/nonexistent/floodsom/dem.asc"));
}

TEST_CASE("sampling with n = 0 returns nothing") {
    DemGrid g(100, 100, 20.0);
    CHECK(sample_inflow_locations(g, 0, 100.0, 5, 1).empty());
}

TEST_CASE("sampled locations satisfy distinctness, separation and margin") {
    DemGrid g(100, 100, 20.0);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto locs = sample_inflow_locations(g, 29, 100.0, 5, seed);
        REQUIRE(locs.size() == 29);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (std::size_t i = 0; i < locs.size(); ++i) {
            const auto& a = locs[i];
            CHECK(a.row >= 5);
            CHECK(a.col >= 5);
            CHECK(a.row < 95);
            CHECK(a.col < 95);
            CHECK(seen.insert({a.row, a.col}).second);
            for (std::size_t j = 0; j < i; ++j) {
                const double dr = (static_cast<double>(a.row) - static_cast<double>(locs[j].row)) * 20;
                const double dc = (static_cast<double>(a.col) - static_cast<double>(locs[j].col)) * 20;
                CHECK(std::sqrt(dr * dr + dc * dc) >= 100.0);
            }
        }
        CHECK(sample_inflow_locations(g, 29, 100.0, 5, seed) == locs);
    }
}

TEST_CASE("unsatisfiable sampling raises SamplingError") {
    DemGrid g(20, 20, 20.0);
    CHECK_THROWS_AS(sample_inflow_locations(g, 50, 200.0, 2, 1, 500), SamplingError);
    CHECK_THROWS_AS(sample_inflow_locations(g, 1, 0.0, 10, 1), SamplingError);
}

}  // TEST_SUITE
