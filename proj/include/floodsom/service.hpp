#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "floodsom/ca_flood.hpp"
#include "floodsom/pipeline.hpp"
#include "floodsom/predictor.hpp"
#include "floodsom/terrain.hpp"

namespace floodsom {

/// Everything a request may read. Never modified after construction.
struct ServeState {
    DemGrid dem;
    CombinedModel model;
    Hydrograph hydrograph;
    SimParams sim;
    std::size_t feature_radius = 3;
    LocationSplit locations;

    /// Checks that the model's feature layout fits the DEM and radius.
    void validate() const;
};

/// Loads dem.asc, combined.json and locations.json from the output directory.
ServeState load_serve_state(const PipelineConfig& cfg);

struct HttpReply {
    int status = 200;
    std::string body;  ///< JSON
};

HttpReply handle_health();
HttpReply handle_get_dem(const ServeState& state);
/// Body {"row": r, "col": c}.
HttpReply handle_predict(const ServeState& state, const std::string& body);
HttpReply handle_simulate(const ServeState& state, const std::string& body);

/**
 * Blocking HTTP server: GET /api/health, GET /api/dem, POST /api/predict,
 * POST /api/simulate, and optionally static UI files at "/".
 */
class Server {
public:
    explicit Server(const ServeState& state);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and returns the port; 0 picks a free one.
    int bind(const std::string& host, int port);
    void mount_static(const std::filesystem::path& dir);
    /// Serves until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace floodsom
