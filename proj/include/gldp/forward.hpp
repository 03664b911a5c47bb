#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gldp/coeffs.hpp"
#include "gldp/paths.hpp"

namespace gldp {

struct ForwardSolution {
    double x0 = 0.0;
    double eps = 0.0;
    int scenario_id = 0;
    std::uint64_t path_index = 0;
    std::vector<double> x;  // on grid nodes, x[0] = x0
};

/// Deterministic limit path phi' = b(phi), phi(s) = x0.
struct LimitForward {
    std::vector<double> phi;
};

/// |X| above this aborts the path with a "blow-up" error.
inline constexpr double kBlowUpLevel = 1e6;

/// Euler-Maruyama on the grid:
/// X_{k+1} = X_k + b dt + eps h d<B>_k + eps sigma dB_k.
ForwardSolution solve_forward(const CoefficientSet& c, double eps, double x0, const GPath& path,
                              const Scenario& scenario, const TimeGrid& grid,
                              std::uint64_t path_index = 0);

/// Classical RK4 for phi' = b(phi).
LimitForward solve_limit_ode(const CoefficientSet& c, double x0, const TimeGrid& grid);

/// sup_t |X_t - phi_t|^p per path, then the sup-over-scenarios mean.
double forward_error(std::span<const ForwardSolution> batch, const LimitForward& phi, double p);

}  // namespace gldp
