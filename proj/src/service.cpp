#include "floodsom/service.hpp"

#include <chrono>

#include <httplib.h>

#include "floodsom/errors.hpp"
#include "floodsom/eval.hpp"
#include "floodsom/features.hpp"
#include "floodsom/json_io.hpp"

namespace floodsom {

void ServeState::validate() const {
    validate_dem(dem);
    if (model.feature_dim() != feature_dim_for_radius(feature_radius))
        throw ConfigError("model feature_dim does not match feature radius " +
                          std::to_string(feature_radius));
    if (model.feature_radius() != 0 && model.feature_radius() != feature_radius)
        throw ConfigError("model was trained with a different feature radius");
}

ServeState load_serve_state(const PipelineConfig& cfg) {
    const ArtifactPaths paths{cfg.output_dir};
    for (const auto& p : {paths.dem(), paths.combined(), paths.locations()})
        if (!std::filesystem::exists(p)) throw MissingArtifact(p);
    ServeState s{read_asc(paths.dem()),
                 load_combined(paths.combined()),
                 cfg.hydrograph,
                 cfg.sim,
                 cfg.feature_radius,
                 locations_from_json(read_json_file(paths.locations()))};
    s.validate();
    return s;
}

namespace {

HttpReply error_reply(int status, const std::string& message) {
    return {status, json{{"error", message}}.dump()};
}

json stats_json(const DepthStats& s) {
    return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"std", s.std}};
}

std::vector<double> to_vec(const Raster& r) { return {r.values().begin(), r.values().end()}; }

/// Parses {"row", "col"}; returns an error reply through `err` on failure.
std::optional<CellIndex> parse_cell(const ServeState& state, const std::string& body,
                                    HttpReply& err) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error&) {
        err = error_reply(400, "request body is not valid JSON");
        return std::nullopt;
    }
    if (!j.is_object() || !j.contains("row") || !j.contains("col") ||
        !j["row"].is_number_integer() || !j["col"].is_number_integer()) {
        err = error_reply(400, "body must be {\"row\": <int>, \"col\": <int>}");
        return std::nullopt;
    }
    const auto row = j["row"].get<long long>();
    const auto col = j["col"].get<long long>();
    if (row < 0 || col < 0 || static_cast<std::size_t>(row) >= state.dem.nrows() ||
        static_cast<std::size_t>(col) >= state.dem.ncols()) {
        err = error_reply(400, "cell (" + std::to_string(row) + ", " + std::to_string(col) +
                                   ") is outside the " + std::to_string(state.dem.nrows()) + "x" +
                                   std::to_string(state.dem.ncols()) + " grid");
        return std::nullopt;
    }
    return CellIndex{static_cast<std::size_t>(row), static_cast<std::size_t>(col)};
}

json location_list(const std::vector<Location>& locs) {
    json a = json::array();
    for (const auto& l : locs) a.push_back({{"id", l.id}, {"row", l.cell.row}, {"col", l.cell.col}});
    return a;
}

}  // namespace

HttpReply handle_health() { return {200, json{{"status", "ok"}}.dump()}; }

HttpReply handle_get_dem(const ServeState& state) {
    json j{{"nrows", state.dem.nrows()},
           {"ncols", state.dem.ncols()},
           {"cell_size", state.dem.cell_size()},
           {"elevations", to_vec(state.dem)},
           {"locations",
            {{"train", location_list(state.locations.train)},
             {"validation", location_list(state.locations.validation)}}}};
    return {200, j.dump()};
}

HttpReply handle_predict(const ServeState& state, const std::string& body) {
    HttpReply err;
    const auto cell = parse_cell(state, body, err);
    if (!cell) return err;
    const auto pred = predict_map(state.model, state.dem, *cell, state.feature_radius);
    json j{{"row", cell->row},
           {"col", cell->col},
           {"model_id", pred.model_id},
           {"depths", to_vec(pred.depths)},
           {"stats", stats_json(depth_stats(pred.depths))},
           {"elapsed_ms", pred.wall_clock * 1e3}};
    return {200, j.dump()};
}

HttpReply handle_simulate(const ServeState& state, const std::string& body) {
    HttpReply err;
    const auto cell = parse_cell(state, body, err);
    if (!cell) return err;
    const auto sim = simulate(state.dem, state.hydrograph, *cell, state.sim);
    const auto pred = predict_map(state.model, state.dem, *cell, state.feature_radius);
    const auto diff = compare_grids(pred.depths, sim.depths);
    const auto extent = extent_metrics(pred.depths, sim.depths, state.model.theta());
    json j{{"row", cell->row},
           {"col", cell->col},
           {"depths", to_vec(sim.depths)},
           {"stats", stats_json(depth_stats(sim.depths))},
           {"diff_vs_prediction",
            {{"min_abs", diff.min_abs},
             {"max_abs", diff.max_abs},
             {"mae", diff.mae},
             {"relative_mae", diff.relative_mae ? json(*diff.relative_mae) : json(nullptr)},
             {"std_abs", diff.std_abs}}},
           {"extent",
            {{"hits", extent.hits},
             {"misses", extent.misses},
             {"false_alarms", extent.false_alarms},
             {"correct_negatives", extent.correct_negatives},
             {"csi", extent.csi}}},
           {"elapsed_ms", sim.wall_clock * 1e3},
           {"prediction_elapsed_ms", pred.wall_clock * 1e3}};
    return {200, j.dump()};
}

// ---------------------------------------------------------------------------

struct Server::Impl {
    const ServeState& state;
    httplib::Server http;
    explicit Impl(const ServeState& s) : state(s) {}
};

Server::Server(const ServeState& state) : impl_(std::make_unique<Impl>(state)) {
    auto& http = impl_->http;
    const ServeState& st = impl_->state;
    auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    };
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
    });
    http.Get("/api/health",
             [send](const httplib::Request&, httplib::Response& res) { send(res, handle_health()); });
    http.Get("/api/dem", [send, &st](const httplib::Request&, httplib::Response& res) {
        send(res, handle_get_dem(st));
    });
    http.Post("/api/predict", [send, &st](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_predict(st, req.body));
    });
    http.Post("/api/simulate", [send, &st](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_simulate(st, req.body));
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr ep) {
        std::string msg = "internal error";
        try {
            if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            msg = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(json{{"error", msg}}.dump(), "application/json");
    });
}

Server::~Server() = default;

int Server::bind(const std::string& host, int port) {
    if (port == 0) return impl_->http.bind_to_any_port(host);
    if (!impl_->http.bind_to_port(host, port))
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void Server::mount_static(const std::filesystem::path& dir) {
    if (!impl_->http.set_mount_point("/", dir.string()))
        throw std::runtime_error("static directory not found: " + dir.string());
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() { impl_->http.stop(); }

}  // namespace floodsom
