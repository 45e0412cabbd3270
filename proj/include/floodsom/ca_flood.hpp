#pragma once

#include <utility>
#include <vector>

#include "floodsom/terrain.hpp"

namespace floodsom {

/**
 * Piecewise-linear inflow series. Breakpoint times start at 0 and strictly
 * increase; flow is zero after the last breakpoint.
 */
class Hydrograph {
public:
    struct Breakpoint {
        double t = 0.0;  ///< s
        double q = 0.0;  ///< m^3/s
    };

    Hydrograph() = default;
    explicit Hydrograph(std::vector<Breakpoint> breakpoints);

    /// Triangle (0,0) -> (900 s, 5 m^3/s) -> (3600 s, 0).
    static Hydrograph default_triangle();

    const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

    /// Linear interpolation; 0 for t beyond the last breakpoint or t < 0.
    double flow_at(double t) const;
    /// Exact (trapezoidal) integral of flow_at over [0, t].
    double volume(double t) const;

private:
    std::vector<Breakpoint> breakpoints_;
};

inline double flow_at(const Hydrograph& h, double t) { return h.flow_at(t); }
inline double hydrograph_volume(const Hydrograph& h, double t) { return h.volume(t); }

struct SimParams {
    double manning_n = 0.05;         ///< s m^(-1/3)
    double dt = 1.0;                 ///< s
    double duration = 7200.0;        ///< s
    double depth_tolerance = 1e-6;   ///< m, cells at or below this do not spill
    double level_tolerance = 1e-6;   ///< m, minimum level drop that drives flow

    void validate() const;
};

struct FloodState {
    Raster depths;                ///< m
    double sim_time = 0.0;        ///< s
    double injected_volume = 0.0; ///< m^3

    static FloodState dry(const DemGrid& dem) { return {dem.like(0.0), 0.0, 0.0}; }
};

/**
 * Weighted cellular-automata step on the 4-neighbour stencil.
 *
 * Each cell with depth above depth_tolerance spills to the neighbours whose
 * water level l = z + d is lower by more than level_tolerance. The total
 * spilled volume is
 *
 *   V_out = min(A d, A dl_max / 2, v d dx dt),   v = d^(2/3) sqrt(dl_max / dx) / n
 *
 * and is split in proportion to each neighbour's level drop. All fluxes are
 * computed from the incoming state before any is applied, so the result does
 * not depend on traversal order. Boundaries are closed. After the fluxes the
 * source receives the hydrograph volume of [t, t + dt).
 */
FloodState step(const FloodState& state, const DemGrid& dem, const Hydrograph& hydrograph,
                CellIndex source, const SimParams& params, double t, double dt);

/// Step with params.dt.
inline FloodState step(const FloodState& state, const DemGrid& dem, const Hydrograph& hydrograph,
                       CellIndex source, const SimParams& params, double t) {
    return step(state, dem, hydrograph, source, params, t, params.dt);
}

struct SimulationResult {
    Raster depths;          ///< final depth field, m
    double wall_clock = 0;  ///< s
    double injected_volume = 0;
};

/// Runs step() from a dry start to params.duration (last step shortened if needed).
SimulationResult simulate(const DemGrid& dem, const Hydrograph& hydrograph, CellIndex source,
                          const SimParams& params);

/// Sum of depth * cell area, m^3.
double total_volume(const Raster& depths);

}  // namespace floodsom
