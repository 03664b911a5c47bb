#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gldp/coeffs.hpp"
#include "gldp/convex.hpp"
#include "gldp/gcore.hpp"
#include "gldp/paths.hpp"
#include "gldp/vi.hpp"

namespace gldp {

/// Piecewise-constant controls, one value per grid cell; eta_dot in variance units.
struct ControlPair {
    std::vector<double> phi_dot;
    std::vector<double> eta_dot;
};

/// Value of J, Lambda or Lambda' with the controls that attain it.
/// An infinite value (empty feasible set) is flagged by `infinite`; `value`
/// then holds +inf.
struct RateResult {
    double value = 0.0;
    bool infinite = false;
    ControlPair optimal_control;
    std::vector<double> target;  // path the rate was evaluated at (phi_tilde)

    static RateResult infinity(std::vector<double> target);
};

struct RateOptions {
    /// Use the b-only controlled dynamics x + int b(Psi) dr. The rate is then
    /// 0 on the limit path and +inf elsewhere.
    bool psi_hat_b_only = false;
};

/// 1/2 sum phi_dot_k^2 / eta_dot_k dt; +inf if some eta_dot_k leaves `bounds`.
/// Throws if some eta_dot_k <= 0.
double action_J(const ControlPair& ctrl, const TimeGrid& grid, const VolBounds& bounds);
double action_J(const ControlPair& ctrl, const TimeGrid& grid);

enum class OdeScheme {
    rk4,               // classical RK4 with frozen cell controls
    implicit_midpoint, // exact inverse of the cell inversion used by lambda_rate
};

/// Psi' = b(Psi) + sigma(Psi) phi_dot + h(Psi) eta_dot, Psi(s) = x0; with
/// psi_hat_b_only the control terms are dropped.
std::vector<double> controlled_ode(const CoefficientSet& c, double x0, const ControlPair& ctrl,
                                   const TimeGrid& grid, OdeScheme scheme = OdeScheme::rk4,
                                   const RateOptions& options = {});

struct EtaMin {
    double v_star = 0.0;
    double cost = 0.0;  // (a - h v*)^2 / (sigma^2 v*)
};

/// Minimizes (a - h v)^2 / (sigma^2 v) over v in [sigma_lo_sq, sigma_hi_sq].
/// The objective is convex in v > 0 with stationary point |a / h|, so the
/// minimizer is that point clamped to the box (sigma_hi_sq when h = 0 or on ties).
EtaMin pointwise_eta_min(double a, double h_val, double sigma_val, const VolBounds& bounds);

/// Lambda(phi_tilde): the cheapest control pair whose controlled path is
/// x0 + phi_tilde. Per cell, coefficients are frozen at the cell midpoint of
/// the target, a_k = (psi_{k+1} - psi_k)/dt - b(mid) and the inner problem is
/// solved by pointwise_eta_min. The recovered controls are replayed with the
/// implicit midpoint scheme and must reproduce the target within 1e-6.
RateResult lambda_rate(const CoefficientSet& c, const VolBounds& bounds, double x0,
                       std::span<const double> target, const TimeGrid& grid,
                       const RateOptions& options = {});

/// Lambda'(psi): inverts psi_t = u0(t, x0 + phi_tilde_t) row by row on the
/// grid field (each row must be strictly monotone in x) and returns
/// lambda_rate of the preimage. A target outside a row's range, or a
/// preimage that does not start at x0, yields an infinite result.
RateResult lambda_prime(const CoefficientSet& c, const VolBounds& bounds, double x0,
                        std::span<const double> target_psi, const VIGrid& u0, const TimeGrid& grid,
                        const RateOptions& options = {});

/// {"value": v | null, "infinite": bool, "phi_dot": [...], "eta_dot": [...], "target": [...]}
std::string rate_result_json(const RateResult& r);

}  // namespace gldp
