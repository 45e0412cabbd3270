#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "floodsom/errors.hpp"
#include "floodsom/eval.hpp"
#include "test_util.hpp"

using namespace floodsom;

namespace {

std::vector<double> random_grid(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> g(n);
    for (double& v : g) v = u(rng) < 0.6 ? 0.0 : 0.4 * u(rng);
    return g;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("depth statistics of small grids") {
    auto s = depth_stats(std::vector<double>{0.0, 0.0, 0.0});
    CHECK(s.min == 0.0);
    CHECK(s.max == 0.0);
    CHECK(s.mean == 0.0);
    CHECK(s.std == 0.0);
    s = depth_stats(std::vector<double>{0.0, 0.389});
    CHECK(s.max == 0.389);
    s = depth_stats(std::vector<double>{0.1, 0.3});
    CHECK(s.mean == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.std == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(depth_stats(std::vector<double>{}), InputError);
}

TEST_CASE("depth statistics match a two-pass oracle") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 200; ++t) {
        const auto g = random_grid(1 + rng() % 300, rng);
        double mn = g[0], mx = g[0], sum = 0.0;
        for (double v : g) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            sum += v;
        }
        const double mean = sum / static_cast<double>(g.size());
        double ss = 0.0;
        for (double v : g) ss += (v - mean) * (v - mean);
        const auto s = depth_stats(g);
        CHECK(s.min == mn);
        CHECK(s.max == mx);
        CHECK(std::abs(s.mean - mean) <= 1e-12);
        CHECK(std::abs(s.std - std::sqrt(ss / static_cast<double>(g.size()))) <= 1e-12);
        CHECK(s.min <= s.mean);
        CHECK(s.mean <= s.max);
    }
}

TEST_CASE("difference statistics") {
    const std::vector<double> pred{0.0, 0.1}, truth{0.0, 0.2};
    const auto d = compare_grids(pred, truth);
    CHECK(d.max_abs == doctest::Approx(0.1));
    CHECK(d.mae == doctest::Approx(0.05));
    REQUIRE(d.relative_mae.has_value());
    CHECK(*d.relative_mae == doctest::Approx(0.5));

    const auto same = compare_grids(truth, truth);
    CHECK(same.max_abs == 0.0);
    CHECK(same.mae == 0.0);
    CHECK(same.std_abs == 0.0);

    const std::vector<double> dry{0.0, 0.0};
    CHECK_FALSE(compare_grids(pred, dry).relative_mae.has_value());
    CHECK_THROWS_AS(compare_grids(pred, std::vector<double>{0.0}), InputError);
    CHECK_THROWS_AS(compare_grids(Raster(2, 2, 1.0), Raster(2, 3, 1.0)), InputError);
}

TEST_CASE("mean absolute error is symmetric and obeys the triangle inequality") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng() % 200;
        const auto a = random_grid(n, rng), b = random_grid(n, rng), c = random_grid(n, rng);
        CHECK(compare_grids(a, b).mae == compare_grids(b, a).mae);
        CHECK(compare_grids(a, c).mae <=
              compare_grids(a, b).mae + compare_grids(b, c).mae + 1e-15);
    }
}

TEST_CASE("extent contingency and CSI") {
    // cells A, B, C, D: pred wet {A, B}, truth wet {B, C}
    const std::vector<double> pred{0.1, 0.2, 0.0, 0.0}, truth{0.0, 0.05, 0.3, 0.0};
    const auto m = extent_metrics(pred, truth);
    CHECK(m.hits == 1);
    CHECK(m.misses == 1);
    CHECK(m.false_alarms == 1);
    CHECK(m.correct_negatives == 1);
    CHECK(m.csi == doctest::Approx(1.0 / 3.0));

    CHECK(extent_metrics(pred, pred).csi == 1.0);
    CHECK(extent_metrics(std::vector<double>{0.1, 0.0}, std::vector<double>{0.0, 0.1}).csi == 0.0);
    CHECK(extent_metrics(std::vector<double>{0.0, 0.02}, std::vector<double>{0.0, 0.0}).csi == 1.0);
    // theta itself counts as wet
    CHECK(extent_metrics(std::vector<double>{0.03}, std::vector<double>{0.03}).hits == 1);

    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng() % 100;
        const auto e = extent_metrics(random_grid(n, rng), random_grid(n, rng));
        CHECK(e.hits + e.misses + e.false_alarms + e.correct_negatives == n);
        CHECK(e.csi >= 0.0);
        CHECK(e.csi <= 1.0);
    }
}

TEST_CASE("time and depth formatting") {
    CHECK(format_seconds(11.0) == "11 s");
    CHECK(format_seconds(0.4123) == "0.412 s");
    CHECK(format_seconds(1234.4) == "1234 s");
    // -9/11 is -81.8%; a 9 s saving reads -80.0% when the flood model took 11.25 s
    CHECK(format_time_delta(11.0, 2.0) == "-9 s (-81.8%)");
    CHECK(format_time_delta(11.25, 2.25) == "-9 s (-80.0%)");
    CHECK(format_time_delta(0.5, 0.5) == "0 s (0.0%)");
    CHECK(format_depth_delta(0.072, 0.389) == "0.072 m (18.5%)");
    CHECK(format_depth_delta(0.0, 0.0) == "0.000 m (0.0%)");
    CHECK(format_depth_delta(0.01, 0.0) == "0.010 m (n/a)");
}

TEST_CASE("report has one block per location plus the aggregate") {
    const Raster t1(2, 2, 1.0, 0.0, 0.0, std::vector<double>{0.0, 0.2, 0.0, 0.4});
    const Raster p1(2, 2, 1.0, 0.0, 0.0, std::vector<double>{0.0, 0.1, 0.0, 0.4});
    const Raster t2(2, 2, 1.0, 0.0, 0.0, std::vector<double>{0.1, 0.0, 0.0, 0.0});
    const Raster p2(2, 2, 1.0, 0.0, 0.0, std::vector<double>{0.0, 0.0, 0.05, 0.0});
    const std::vector<EvalCase> cases{{"a", {0, 1}, &t1, &p1, 11.0, 2.0},
                                      {"b", {1, 0}, &t2, &p2, 13.0, 2.0}};
    const auto r = build_report(cases);
    REQUIRE(r.locations.size() == 2);
    CHECK(r.aggregate.ca_time == 12.0);
    CHECK(r.aggregate.som_time == 2.0);
    CHECK(r.speedup == 6.0);
    // pooled: |diff| = {0, .1, 0, 0, .1, 0, .05, 0}, truth mean = 0.7 / 8
    CHECK(r.aggregate.diff.mae == doctest::Approx(0.25 / 8));
    CHECK(*r.aggregate.diff.relative_mae == doctest::Approx(0.25 / 0.7));
    CHECK(r.aggregate.extent.hits == 2);

    const auto txt = format_report_table(r);
    CHECK(txt.find("Flood model") != std::string::npos);
    CHECK(txt.find("SOM") != std::string::npos);
    CHECK(txt.find("Model results differences") != std::string::npos);
    CHECK(txt.find("-9 s (-81.8%)") != std::string::npos);
    CHECK(txt.find("Location a (row 0, col 1)") != std::string::npos);
    CHECK(txt.find("Location b") != std::string::npos);
    CHECK(txt.find("St. Dev.") != std::string::npos);

    const auto j = report_to_json(r, false);
    CHECK(j["validation_locations"].size() == 2);
    CHECK_FALSE(j.contains("speedup"));
    CHECK_FALSE(j["aggregate"].contains("ca_time"));
    CHECK(report_to_json(r, true)["speedup"] == 6.0);
    CHECK(timings_to_json(r)["locations"][0]["speedup"] == 5.5);
    // pure: same inputs, same output
    CHECK(report_to_json(build_report(cases), false) == j);

    CHECK_THROWS_AS(build_report(std::vector<EvalCase>{}), InputError);
}

TEST_CASE("benchmark times both models for every source") {
    const auto dem = testutil::random_dem(10, 10, 10.0, 4);
    const std::size_t dim = feature_dim_for_radius(1);
    NormStats ns{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0),
                 std::vector<bool>(dim, false)};
    std::vector<double> f(4 * dim, 0.0);
    for (std::size_t i = 0; i < 4; ++i) f[i * dim] = static_cast<double>(i);
    const CombinedModel cm(dim, f, {0.0, 0.0, 0.1, 0.2},
                           {Origin::zero, Origin::zero, Origin::wet, Origin::wet}, 2, 0.03, ns, 1);
    SimParams p;
    p.duration = 60.0;
    const std::vector<CellIndex> src{{3, 3}, {6, 6}};
    const auto r = run_benchmark(dem, Hydrograph::default_triangle(), cm, src, p, 1);
    REQUIRE(r.locations.size() == 2);
    CHECK(r.locations[1].id == "loc1");
    CHECK(r.locations[0].source == CellIndex{3, 3});
    CHECK(r.locations[0].ca_time > 0.0);
    CHECK(r.locations[0].som_time > 0.0);
    CHECK(r.speedup > 0.0);
    CHECK_THROWS_AS(run_benchmark(dem, Hydrograph::default_triangle(), cm, {}, p, 1), InputError);
    CHECK_THROWS_AS(run_benchmark(dem, Hydrograph::default_triangle(), cm, src, p, 1, {}, 0), InputError);
    // repeated timing leaves the maps themselves unchanged
    const auto r3 = run_benchmark(dem, Hydrograph::default_triangle(), cm, src, p, 1, {}, 3);
    CHECK(report_to_json(r3, false) == report_to_json(r, false));
}

}  // TEST_SUITE
