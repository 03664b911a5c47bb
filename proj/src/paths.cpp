#include "gldp/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gldp/error.hpp"
#include "gldp/rng.hpp"

namespace gldp {

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k) t[k] = node(k);
    return t;
}

TimeGrid make_time_grid(double s, double T, int n_steps) {
    if (!std::isfinite(s) || !std::isfinite(T)) fail_argument("time grid: s and T must be finite");
    if (s < 0.0) fail_argument("time grid: s must be >= 0");
    if (!(s < T)) fail_argument("time grid: requires s < T");
    if (n_steps < 1) fail_argument("time grid: n_steps must be >= 1");
    return TimeGrid{s, T, n_steps, (T - s) / n_steps};
}

ScenarioFamily scenario_family(const VolBounds& bounds, const TimeGrid& grid, int n_random,
                               std::uint64_t seed) {
    if (n_random < 0) fail_argument("scenario family: n_random must be >= 0");
    const auto n = static_cast<std::size_t>(grid.n_steps);
    const double lo = bounds.sigma_lo_sq;
    const double hi = bounds.sigma_hi_sq;

    ScenarioFamily family;
    family.reserve(3 + static_cast<std::size_t>(n_random));
    family.push_back({kScenarioLow, std::vector<double>(n, lo)});
    family.push_back({kScenarioHigh, std::vector<double>(n, hi)});
    Scenario bang{kScenarioBangBang, std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) bang.var_path[k] = (k % 2 == 0) ? hi : lo;
    family.push_back(std::move(bang));

    for (int r = 0; r < n_random; ++r) {
        CounterStream rs(seed, StreamDomain::scenario_values, static_cast<std::uint64_t>(r));
        Scenario sc{3 + r, std::vector<double>(n)};
        for (auto& v : sc.var_path) v = std::clamp(lo + rs.uniform() * (hi - lo), lo, hi);
        family.push_back(std::move(sc));
    }
    return family;
}

GPath build_g_path(const Scenario& scenario, const TimeGrid& grid,
                   std::span<const double> standard_normals) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (scenario.var_path.size() != n) {
        fail_argument("scenario " + std::to_string(scenario.id) + " has " +
                      std::to_string(scenario.var_path.size()) + " cells, grid has " +
                      std::to_string(n));
    }
    if (standard_normals.size() < n) fail_argument("gaussian driver shorter than the grid");

    GPath p;
    p.b_incr.resize(n);
    p.qv_incr.resize(n);
    p.b.assign(n + 1, 0.0);
    p.qv.assign(n + 1, 0.0);
    const double sqrt_dt = std::sqrt(grid.dt);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = scenario.var_path[k];
        p.b_incr[k] = std::sqrt(v) * sqrt_dt * standard_normals[k];
        p.qv_incr[k] = v * grid.dt;
        p.b[k + 1] = p.b[k] + p.b_incr[k];
        p.qv[k + 1] = p.qv[k] + p.qv_incr[k];
    }
    return p;
}

GPath build_g_path(const Scenario& scenario, const TimeGrid& grid, std::uint64_t seed,
                   std::uint64_t path_index) {
    const auto z = gaussian_driver(seed, path_index, static_cast<std::size_t>(grid.n_steps));
    return build_g_path(scenario, grid, z);
}

bool check_qv_bounds(const GPath& path, const TimeGrid& grid, const VolBounds& bounds) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (path.qv_incr.size() != n || path.qv.size() != n + 1) return false;
    if (path.qv[0] != 0.0 || path.b[0] != 0.0) return false;
    const double lo_step = bounds.sigma_lo_sq * grid.dt;
    const double hi_step = bounds.sigma_hi_sq * grid.dt;
    for (double dq : path.qv_incr) {
        if (dq < lo_step || dq > hi_step) return false;
    }
    // Window condition for all j < k: hi_gap(k) <= min_{j<k} hi_gap(j) and
    // lo_gap(k) >= max_{j<k} lo_gap(j), with gap(k) = qv[k] - k*dt*bound.
    const double tol = 1e-12 * std::max(1.0, path.qv[n]);
    double min_hi_gap = 0.0;
    double max_lo_gap = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double hi_gap = path.qv[k] - kk * hi_step;
        const double lo_gap = path.qv[k] - kk * lo_step;
        if (hi_gap > min_hi_gap + tol || lo_gap < max_lo_gap - tol) return false;
        min_hi_gap = std::min(min_hi_gap, hi_gap);
        max_lo_gap = std::max(max_lo_gap, lo_gap);
    }
    return true;
}

}  // namespace gldp
