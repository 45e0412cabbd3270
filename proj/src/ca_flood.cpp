#include "floodsom/ca_flood.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "floodsom/errors.hpp"

namespace floodsom {

Hydrograph::Hydrograph(std::vector<Breakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty()) throw ConfigError("hydrograph needs at least one breakpoint");
    if (breakpoints_.front().t != 0.0) throw ConfigError("hydrograph must start at t = 0");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        const auto& b = breakpoints_[i];
        if (!std::isfinite(b.t) || !std::isfinite(b.q) || b.q < 0.0)
            throw ConfigError("hydrograph discharge must be finite and non-negative");
        if (i > 0 && !(b.t > breakpoints_[i - 1].t))
            throw ConfigError("hydrograph times must be strictly increasing");
    }
}

Hydrograph Hydrograph::default_triangle() {
    return Hydrograph({{0.0, 0.0}, {900.0, 5.0}, {3600.0, 0.0}});
}

double Hydrograph::flow_at(double t) const {
    if (breakpoints_.empty() || t < 0.0 || t > breakpoints_.back().t) return 0.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t,
                               [](double v, const Breakpoint& b) { return v < b.t; });
    // it points past the bracketing segment start; t >= 0 = front().t guarantees it != begin
    const auto& lo = *(it - 1);
    if (it == breakpoints_.end() || lo.t == t) return lo.q;
    const auto& hi = *it;
    const double f = (t - lo.t) / (hi.t - lo.t);
    return lo.q + f * (hi.q - lo.q);
}

double Hydrograph::volume(double t) const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
        const auto& a = breakpoints_[i];
        const auto& b = breakpoints_[i + 1];
        if (t <= a.t) break;
        const double end = std::min(t, b.t);
        const double q_end = end == b.t ? b.q : flow_at(end);
        total += 0.5 * (a.q + q_end) * (end - a.t);
    }
    return total;
}

void SimParams::validate() const {
    if (!(manning_n > 0) || !(dt > 0) || !(duration > 0) || !(depth_tolerance > 0) ||
        !(level_tolerance > 0))
        throw ConfigError("simulation parameters must all be positive");
    if (dt > duration) throw ConfigError("dt must not exceed duration");
}

double total_volume(const Raster& depths) {
    double sum = 0.0;
    for (double d : depths.values()) sum += d;
    return sum * depths.cell_area();
}

namespace {

/**
 * Reusable buffers for the two-phase update. Transfers are stored as depth
 * (volume / cell area) moved from a cell towards each neighbour.
 */
class Stepper {
public:
    Stepper(const DemGrid& dem, const SimParams& params)
        : dem_(dem), params_(params), n_(dem.size()), to_north_(n_), to_south_(n_), to_west_(n_),
          to_east_(n_), loss_(n_) {}

    /// Advance `depths` in place by `dt`, excluding source injection.
    void advance(std::vector<double>& depths, double dt) {
        const std::size_t rows = dem_.nrows();
        const std::size_t cols = dem_.ncols();
        const auto z = dem_.values();
        const double dx = dem_.cell_size();
        const double inv_n = 1.0 / params_.manning_n;
        const double dtol = params_.depth_tolerance;
        const double ltol = params_.level_tolerance;

        // phase 1: outflows from the old state
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const std::size_t i = r * cols + c;
                const double d = depths[i];
                to_north_[i] = to_south_[i] = to_west_[i] = to_east_[i] = loss_[i] = 0.0;
                if (d <= dtol) continue;
                const double level = z[i] + d;
                auto drop = [&](std::size_t j) {
                    const double v = level - (z[j] + depths[j]);
                    return v > ltol ? v : 0.0;
                };
                const double dn = r > 0 ? drop(i - cols) : 0.0;
                const double ds = r + 1 < rows ? drop(i + cols) : 0.0;
                const double dw = c > 0 ? drop(i - 1) : 0.0;
                const double de = c + 1 < cols ? drop(i + 1) : 0.0;
                const double dmax = std::max(std::max(dn, ds), std::max(dw, de));
                if (dmax == 0.0) continue;
                // pairwise grouping keeps the sum exact under N/S and W/E mirroring
                const double sum = (dn + ds) + (dw + de);
                const double velocity = inv_n * std::cbrt(d * d) * std::sqrt(dmax / dx);
                const double out = std::min({d, 0.5 * dmax, velocity * d * dt / dx});
                to_north_[i] = out * (dn / sum);
                to_south_[i] = out * (ds / sum);
                to_west_[i] = out * (dw / sum);
                to_east_[i] = out * (de / sum);
                loss_[i] = (to_north_[i] + to_south_[i]) + (to_west_[i] + to_east_[i]);
            }
        }

        // phase 2: gather
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const std::size_t i = r * cols + c;
                const double from_n = r > 0 ? to_south_[i - cols] : 0.0;
                const double from_s = r + 1 < rows ? to_north_[i + cols] : 0.0;
                const double from_w = c > 0 ? to_east_[i - 1] : 0.0;
                const double from_e = c + 1 < cols ? to_west_[i + 1] : 0.0;
                const double gain = (from_n + from_s) + (from_w + from_e);
                depths[i] = std::max(0.0, (depths[i] - loss_[i]) + gain);
            }
        }
    }

private:
    const DemGrid& dem_;
    const SimParams& params_;
    std::size_t n_;
    std::vector<double> to_north_, to_south_, to_west_, to_east_, loss_;
};

void check_source(const DemGrid& dem, CellIndex source) {
    if (!dem.contains(source))
        throw InputError("source cell (" + std::to_string(source.row) + ", " +
                         std::to_string(source.col) + ") is outside the " +
                         std::to_string(dem.nrows()) + "x" + std::to_string(dem.ncols()) +
                         " grid");
}

}  // namespace

FloodState step(const FloodState& state, const DemGrid& dem, const Hydrograph& hydrograph,
                CellIndex source, const SimParams& params, double t, double dt) {
    if (!state.depths.same_shape(dem)) throw InputError("flood state shape does not match DEM");
    check_source(dem, source);
    Stepper stepper(dem, params);
    std::vector<double> depths(state.depths.values().begin(), state.depths.values().end());
    stepper.advance(depths, dt);

    const double injected = hydrograph.volume(t + dt) - hydrograph.volume(t);
    depths[dem.index(source)] += injected / dem.cell_area();

    FloodState next{dem.like(0.0), t + dt, state.injected_volume + injected};
    std::copy(depths.begin(), depths.end(), next.depths.values().begin());
    return next;
}

SimulationResult simulate(const DemGrid& dem, const Hydrograph& hydrograph, CellIndex source,
                          const SimParams& params) {
    params.validate();
    check_source(dem, source);
    const auto start = std::chrono::steady_clock::now();

    Stepper stepper(dem, params);
    std::vector<double> depths(dem.size(), 0.0);
    const std::size_t src = dem.index(source);
    const double area = dem.cell_area();
    const auto nsteps = static_cast<std::size_t>(std::ceil(params.duration / params.dt - 1e-9));
    double injected = 0.0;
    double cumulative = 0.0;  // hydrograph volume up to the current time
    for (std::size_t k = 0; k < nsteps; ++k) {
        const double t0 = static_cast<double>(k) * params.dt;
        const double t1 = k + 1 == nsteps ? params.duration : t0 + params.dt;
        stepper.advance(depths, t1 - t0);
        const double next = hydrograph.volume(t1);
        const double v = next - cumulative;
        cumulative = next;
        depths[src] += v / area;
        injected += v;
    }

    SimulationResult result{dem.like(0.0), 0.0, injected};
    std::copy(depths.begin(), depths.end(), result.depths.values().begin());
    result.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace floodsom
