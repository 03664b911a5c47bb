#pragma once

#include <vector>

#include "gldp/coeffs.hpp"
#include "gldp/convex.hpp"
#include "gldp/forward.hpp"
#include "gldp/paths.hpp"

namespace gldp {

/// Deterministic backward pair (psi, U) along the limit path.
/// psi has one value per node; u_sel[k] is the selection paired with psi[k]
/// on cell k (n_steps values).
struct LimitBackward {
    std::vector<double> psi;
    std::vector<double> u_sel;
};

/// Limit martingale M along one scenario path; m[0] = 0, non-increasing.
struct LimitMartingale {
    int scenario_id = 0;
    std::vector<double> m;
};

/// Semi-implicit proximal Euler, backward in time:
///   pred_k = psi_{k+1} + dt [f(t_k, phi_k, psi_{k+1}, 0) + 2 G(g(t_k, phi_k, psi_{k+1}, 0))]
///   psi_k  = prox(Pi, dt, pred_k),  u_k = Yosida(Pi, dt, pred_k), in closed form for the built-in kinds.
/// psi_N = Phi(phi_N), projected onto the closed domain of Pi when outside it.
LimitBackward solve_limit_backward(const CoefficientSet& c, const ConvexPenalty& penalty,
                                   const VolBounds& bounds, const LimitForward& phi,
                                   const TimeGrid& grid);

/// M_{k+1} = M_k + g_k d<B>_k - 2 G(g_k) dt with g_k = g(t_k, phi_k, psi_k, 0).
/// The increment is evaluated as g_k (d<B>_k - sigma_hi_sq dt) for g_k >= 0
/// and g_k (d<B>_k - sigma_lo_sq dt) otherwise, which is algebraically the same
/// and keeps the sign of every increment exact in floating point.
LimitMartingale build_limit_martingale(const CoefficientSet& c, const VolBounds& bounds,
                                       const LimitForward& phi, const LimitBackward& psi,
                                       const GPath& path, const TimeGrid& grid,
                                       int scenario_id = 0);

/// Left rectangle rule dt * sum_{k<N} Pi(psi_k); +inf when some psi_k
/// (terminal node included) leaves the domain.
double penalty_integral(const ConvexPenalty& penalty, const LimitBackward& psi, const TimeGrid& grid);

}  // namespace gldp
