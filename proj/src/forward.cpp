#include "gldp/forward.hpp"

#include <cmath>
#include <map>
#include <string>

#include "gldp/error.hpp"

namespace gldp {

ForwardSolution solve_forward(const CoefficientSet& c, double eps, double x0, const GPath& path,
                              const Scenario& scenario, const TimeGrid& grid,
                              std::uint64_t path_index) {
    if (!(eps >= 0.0 && eps <= 1.0)) fail_argument("solve_forward: eps must lie in [0, 1]");
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (path.b_incr.size() != n || path.qv_incr.size() != n) {
        fail_argument("solve_forward: path length does not match the grid");
    }
    ForwardSolution sol{x0, eps, scenario.id, path_index, std::vector<double>(n + 1)};
    auto& x = sol.x;
    x[0] = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const double xk = x[k];
        x[k + 1] = xk + c.b(xk) * grid.dt + eps * c.h(xk) * path.qv_incr[k] +
                   eps * c.sigma(xk) * path.b_incr[k];
        if (!std::isfinite(x[k + 1]) || std::abs(x[k + 1]) > kBlowUpLevel) {
            fail_numerical("blow-up in forward equation at step " + std::to_string(k + 1));
        }
    }
    return sol;
}

LimitForward solve_limit_ode(const CoefficientSet& c, double x0, const TimeGrid& grid) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    LimitForward lf{std::vector<double>(n + 1)};
    auto& phi = lf.phi;
    phi[0] = x0;
    const double dt = grid.dt;
    for (std::size_t k = 0; k < n; ++k) {
        const double y = phi[k];
        const double k1 = c.b(y);
        const double k2 = c.b(y + 0.5 * dt * k1);
        const double k3 = c.b(y + 0.5 * dt * k2);
        const double k4 = c.b(y + dt * k3);
        phi[k + 1] = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(phi[k + 1])) {
            fail_numerical("blow-up in limit ODE at step " + std::to_string(k + 1));
        }
    }
    return lf;
}

double forward_error(std::span<const ForwardSolution> batch, const LimitForward& phi, double p) {
    if (batch.empty()) fail_argument("forward_error: empty batch");
    if (!(p >= 2.0)) fail_argument("forward_error: p must be >= 2");
    std::map<int, ScenarioSample> by_scenario;
    for (const auto& sol : batch) {
        if (sol.x.size() != phi.phi.size()) {
            fail_argument("forward_error: solution and limit path lengths differ");
        }
        double sup = 0.0;
        for (std::size_t k = 0; k < sol.x.size(); ++k) {
            sup = std::max(sup, std::abs(sol.x[k] - phi.phi[k]));
        }
        auto& slot = by_scenario[sol.scenario_id];
        slot.id = sol.scenario_id;
        slot.values.push_back(std::pow(sup, p));
    }
    ScenarioSamples samples;
    samples.reserve(by_scenario.size());
    for (auto& [id, s] : by_scenario) samples.push_back(std::move(s));
    return sublinear_expectation(samples);
}

}  // namespace gldp
