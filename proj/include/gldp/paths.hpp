#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gldp/gcore.hpp"

namespace gldp {

/// Uniform grid s = t_0 < t_1 < ... < t_N = T.
struct TimeGrid {
    double s = 0.0;
    double T = 1.0;
    int n_steps = 1;
    double dt = 1.0;

    double node(int k) const noexcept { return k == n_steps ? T : s + k * dt; }
    std::vector<double> nodes() const;
};

TimeGrid make_time_grid(double s, double T, int n_steps);

/// Piecewise-constant squared-volatility control: var_path[k] applies on
/// cell [t_k, t_{k+1}).
struct Scenario {
    int id = 0;
    std::vector<double> var_path;
};

using ScenarioFamily = std::vector<Scenario>;

/// Ids of the scenarios every family starts with.
inline constexpr int kScenarioLow = 0;
inline constexpr int kScenarioHigh = 1;
inline constexpr int kScenarioBangBang = 2;

/// Constant-low, constant-high and cell-alternating bang-bang scenarios,
/// followed by n_random scenarios with i.i.d. uniform cell values.
ScenarioFamily scenario_family(const VolBounds& bounds, const TimeGrid& grid, int n_random,
                               std::uint64_t seed);

/// Sample path of the G-Brownian motion under one scenario.
/// qv_incr[k] = var_path[k] * dt exactly; b[0] = qv[0] = 0.
struct GPath {
    std::vector<double> b_incr;
    std::vector<double> qv_incr;
    std::vector<double> b;
    std::vector<double> qv;
};

/// Path driven by the shared standard-normal driver of (seed, path_index).
/// The scenario id does not enter the stream, so all scenarios of one path
/// index see common random numbers.
GPath build_g_path(const Scenario& scenario, const TimeGrid& grid, std::uint64_t seed,
                   std::uint64_t path_index);

/// Same construction from an already generated driver of grid.n_steps normals.
GPath build_g_path(const Scenario& scenario, const TimeGrid& grid,
                   std::span<const double> standard_normals);

/// Checks every increment lies in [dt*lo, dt*hi] (exact comparison) and that
/// qv[k]-qv[j] stays within [(t_k-t_j)lo, (t_k-t_j)hi] up to summation
/// rounding (relative 1e-12) for all j < k.
bool check_qv_bounds(const GPath& path, const TimeGrid& grid, const VolBounds& bounds);

}  // namespace gldp
