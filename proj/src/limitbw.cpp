#include "gldp/limitbw.hpp"

#include <cmath>
#include <string>

#include "gldp/error.hpp"
#include "gldp/numeric.hpp"

namespace gldp {

LimitBackward solve_limit_backward(const CoefficientSet& c, const ConvexPenalty& penalty,
                                   const VolBounds& bounds, const LimitForward& phi,
                                   const TimeGrid& grid) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (phi.phi.size() != n + 1) fail_argument("solve_limit_backward: phi does not match the grid");
    LimitBackward lb{std::vector<double>(n + 1), std::vector<double>(n)};
    const double dt = grid.dt;
    lb.psi[n] = penalty.project_domain(c.Phi(phi.phi[n]));
    for (std::size_t k = n; k-- > 0;) {
        const double t = grid.node(static_cast<int>(k));
        const double next = lb.psi[k + 1];
        const double pred =
            next + dt * (c.f(t, phi.phi[k], next, 0.0) + 2.0 * g_function(c.g(t, phi.phi[k], next, 0.0), bounds));
        const double cur = penalty.prox(dt, pred);
        if (!std::isfinite(cur)) {
            fail_numerical("solve_limit_backward: non-finite value at step " + std::to_string(k));
        }
        lb.psi[k] = cur;
        lb.u_sel[k] = penalty.yosida(dt, pred);
    }
    return lb;
}

LimitMartingale build_limit_martingale(const CoefficientSet& c, const VolBounds& bounds,
                                       const LimitForward& phi, const LimitBackward& psi,
                                       const GPath& path, const TimeGrid& grid, int scenario_id) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (path.qv_incr.size() != n || phi.phi.size() != n + 1 || psi.psi.size() != n + 1) {
        fail_argument("build_limit_martingale: inputs do not match the grid");
    }
    LimitMartingale lm{scenario_id, std::vector<double>(n + 1, 0.0)};
    const double hi_step = bounds.sigma_hi_sq * grid.dt;
    const double lo_step = bounds.sigma_lo_sq * grid.dt;
    for (std::size_t k = 0; k < n; ++k) {
        const double g = c.g(grid.node(static_cast<int>(k)), phi.phi[k], psi.psi[k], 0.0);
        const double incr = g >= 0.0 ? g * (path.qv_incr[k] - hi_step) : g * (path.qv_incr[k] - lo_step);
        lm.m[k + 1] = lm.m[k] + incr;
    }
    return lm;
}

double penalty_integral(const ConvexPenalty& penalty, const LimitBackward& psi, const TimeGrid& grid) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < psi.psi.size(); ++k) {
        const double pv = penalty.eval(psi.psi[k]);
        if (!std::isfinite(pv)) return ConvexPenalty::inf;
        if (k + 1 < psi.psi.size()) acc.add(pv);
    }
    return acc.value() * grid.dt;
}

}  // namespace gldp
