#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "floodsom/ca_flood.hpp"
#include "floodsom/errors.hpp"
#include "floodsom/eval.hpp"
#include "floodsom/pipeline.hpp"
#include "floodsom/predictor.hpp"

namespace py = pybind11;
using namespace floodsom;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Raster to_raster(const Array& a, double cell_size) {
    if (a.ndim() != 2) throw InputError("expected a 2-D array");
    const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
    return Raster(rows, cols, cell_size, 0.0, 0.0, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Raster& r) {
    Array out({r.nrows(), r.ncols()});
    std::copy(r.values().begin(), r.values().end(), out.mutable_data());
    return out;
}

Hydrograph to_hydrograph(const std::vector<std::pair<double, double>>& points) {
    std::vector<Hydrograph::Breakpoint> bps;
    for (const auto& [t, q] : points) bps.push_back({t, q});
    return Hydrograph(std::move(bps));
}

}  // namespace

PYBIND11_MODULE(_floodsom, m) {
    m.doc() = "Flood depth emulation with self-organizing maps";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<MissingArtifact>(m, "MissingArtifact", PyExc_FileNotFoundError);

    m.def("default_config_json", [] { return config_to_json(PipelineConfig{}).dump(); });

    m.def(
        "generate_dem",
        [](const std::string& config_json) {
            return to_array(generate_synthetic_dem(config_from_json(json::parse(config_json)).terrain));
        },
        py::arg("config_json"), "Synthetic DEM for the terrain section of a config.");

    m.def(
        "simulate",
        [](const Array& dem, double cell_size, const std::vector<std::pair<double, double>>& hydrograph,
           std::size_t row, std::size_t col, double duration, double dt) {
            SimParams p;
            p.duration = duration;
            p.dt = dt;
            const auto res = simulate(to_raster(dem, cell_size), to_hydrograph(hydrograph), {row, col}, p);
            return py::make_tuple(to_array(res.depths), res.injected_volume, res.wall_clock);
        },
        py::arg("dem"), py::arg("cell_size"), py::arg("hydrograph"), py::arg("row"), py::arg("col"),
        py::arg("duration") = 7200.0, py::arg("dt") = 1.0,
        "Runs the cellular-automata model; returns (depths, injected volume, seconds).");

    m.def(
        "depth_stats",
        [](const Array& a) {
            const auto s = depth_stats(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
            return py::dict(py::arg("min") = s.min, py::arg("max") = s.max, py::arg("mean") = s.mean,
                            py::arg("std") = s.std);
        },
        py::arg("depths"));

    m.def("format_time_delta", &format_time_delta, py::arg("ca_time"), py::arg("som_time"));

    m.def(
        "run_pipeline",
        [](const std::string& config_json) {
            py::gil_scoped_release release;
            run_pipeline(config_from_json(json::parse(config_json)));
        },
        py::arg("config_json"));

    py::class_<CombinedModel>(m, "CombinedModel")
        .def_static(
            "load",
            [](const std::string& path) {
                if (!std::filesystem::exists(path)) throw MissingArtifact(path);
                return load_combined(path);
            },
            py::arg("path"))
        .def_property_readonly("k", &CombinedModel::k)
        .def_property_readonly("size", &CombinedModel::size)
        .def_property_readonly("feature_radius", &CombinedModel::feature_radius)
        .def_property_readonly("id", &CombinedModel::id)
        .def("with_k", &CombinedModel::with_k, py::arg("k"))
        .def(
            "predict_map",
            [](const CombinedModel& cm, const Array& dem, double cell_size, std::size_t row,
               std::size_t col) {
                return to_array(predict_map(cm, to_raster(dem, cell_size), {row, col}, cm.feature_radius()).depths);
            },
            py::arg("dem"), py::arg("cell_size"), py::arg("row"), py::arg("col"));
}
