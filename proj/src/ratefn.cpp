#include "gldp/ratefn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "gldp/error.hpp"
#include "gldp/numeric.hpp"

namespace gldp {

RateResult RateResult::infinity(std::vector<double> target) {
    RateResult r;
    r.value = std::numeric_limits<double>::infinity();
    r.infinite = true;
    r.target = std::move(target);
    return r;
}

double action_J(const ControlPair& ctrl, const TimeGrid& grid) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (ctrl.phi_dot.size() != n || ctrl.eta_dot.size() != n) {
        fail_argument("action_J: control length does not match the grid");
    }
    CompensatedSum acc;
    for (std::size_t k = 0; k < n; ++k) {
        if (!(ctrl.eta_dot[k] > 0.0)) fail_argument("action_J: eta_dot must be > 0");
        acc.add(ctrl.phi_dot[k] * ctrl.phi_dot[k] / ctrl.eta_dot[k]);
    }
    return 0.5 * acc.value() * grid.dt;
}

double action_J(const ControlPair& ctrl, const TimeGrid& grid, const VolBounds& bounds) {
    const double value = action_J(ctrl, grid);
    for (double v : ctrl.eta_dot) {
        if (v < bounds.sigma_lo_sq || v > bounds.sigma_hi_sq) return std::numeric_limits<double>::infinity();
    }
    return value;
}

namespace {

inline double drift(const CoefficientSet& c, double x, double phi_dot, double eta_dot, bool b_only) {
    return b_only ? c.b(x) : c.b(x) + c.sigma(x) * phi_dot + c.h(x) * eta_dot;
}

}  // namespace

std::vector<double> controlled_ode(const CoefficientSet& c, double x0, const ControlPair& ctrl,
                                   const TimeGrid& grid, OdeScheme scheme, const RateOptions& options) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (ctrl.phi_dot.size() != n || ctrl.eta_dot.size() != n) {
        fail_argument("controlled_ode: control length does not match the grid");
    }
    const bool b_only = options.psi_hat_b_only;
    const double dt = grid.dt;
    std::vector<double> psi(n + 1);
    psi[0] = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = ctrl.phi_dot[k];
        const double e = ctrl.eta_dot[k];
        const double y = psi[k];
        if (scheme == OdeScheme::rk4) {
            const double k1 = drift(c, y, p, e, b_only);
            const double k2 = drift(c, y + 0.5 * dt * k1, p, e, b_only);
            const double k3 = drift(c, y + 0.5 * dt * k2, p, e, b_only);
            const double k4 = drift(c, y + dt * k3, p, e, b_only);
            psi[k + 1] = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else {
            double next = y + dt * drift(c, y, p, e, b_only);
            for (int it = 0; it < 100; ++it) {
                const double upd = y + dt * drift(c, 0.5 * (y + next), p, e, b_only);
                const bool done = std::abs(upd - next) <= 1e-15 * std::max(1.0, std::abs(upd));
                next = upd;
                if (done) break;
            }
            psi[k + 1] = next;
        }
    }
    return psi;
}

EtaMin pointwise_eta_min(double a, double h_val, double sigma_val, const VolBounds& bounds) {
    if (!(sigma_val > 0.0)) fail_argument("pointwise_eta_min: sigma must be > 0");
    const double lo = bounds.sigma_lo_sq;
    const double hi = bounds.sigma_hi_sq;
    auto q = [&](double v) {
        const double r = a - h_val * v;
        return r * r / (sigma_val * sigma_val * v);
    };
    double v = hi;
    if (h_val != 0.0) v = std::clamp(std::abs(a / h_val), lo, hi);
    double cost = q(v);
    // ties toward sigma_hi_sq
    if (v != hi && q(hi) <= cost) {
        v = hi;
        cost = q(hi);
    }
    return {v, cost};
}

RateResult lambda_rate(const CoefficientSet& c, const VolBounds& bounds, double x0,
                       std::span<const double> target, const TimeGrid& grid, const RateOptions& options) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (target.size() != n + 1) fail_argument("lambda_rate: target length does not match the grid");
    if (std::abs(target[0]) > 1e-12) fail_argument("lambda_rate: target must start at 0");
    for (double v : target) {
        if (!std::isfinite(v)) fail_argument("lambda_rate: target has non-finite entries");
    }
    std::vector<double> tgt(target.begin(), target.end());
    const double dt = grid.dt;

    if (options.psi_hat_b_only) {
        // Zero on the b-only path, +inf off it.
        ControlPair zero{std::vector<double>(n, 0.0), std::vector<double>(n, bounds.sigma_hi_sq)};
        const auto path = controlled_ode(c, x0, zero, grid, OdeScheme::implicit_midpoint, options);
        for (std::size_t k = 0; k <= n; ++k) {
            if (std::abs(path[k] - (x0 + tgt[k])) > 1e-6) return RateResult::infinity(std::move(tgt));
        }
        RateResult r;
        r.optimal_control = std::move(zero);
        r.target = std::move(tgt);
        return r;
    }

    RateResult r;
    r.optimal_control.phi_dot.resize(n);
    r.optimal_control.eta_dot.resize(n);
    CompensatedSum acc;
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = x0 + tgt[k];
        const double hi = x0 + tgt[k + 1];
        const double mid = 0.5 * (lo + hi);
        const double s = c.sigma(mid);
        if (!(s > 0.0)) {
            fail_argument("lambda_rate: sigma is not positive along the target at cell " + std::to_string(k));
        }
        const double h = c.h(mid);
        const double a = (hi - lo) / dt - c.b(mid);
        const auto em = pointwise_eta_min(a, h, s, bounds);
        acc.add(em.cost);
        r.optimal_control.eta_dot[k] = em.v_star;
        r.optimal_control.phi_dot[k] = (a - h * em.v_star) / s;
    }
    r.value = 0.5 * acc.value() * dt;

    const auto replay = controlled_ode(c, x0, r.optimal_control, grid, OdeScheme::implicit_midpoint);
    double mismatch = 0.0;
    for (std::size_t k = 0; k <= n; ++k) mismatch = std::max(mismatch, std::abs(replay[k] - (x0 + tgt[k])));
    if (mismatch > 1e-6) {
        fail_numerical("inversion failed: replayed controls miss the target by " + std::to_string(mismatch));
    }
    r.target = std::move(tgt);
    return r;
}

namespace {

/// Solves row(x) = level on the piecewise-linear interpolant of a strictly
/// monotone row; returns NaN when level is outside the row's range.
double invert_row(std::span<const double> row, std::span<const double> xs, double level) {
    const std::size_t n = row.size();
    const bool increasing = row[n - 1] > row[0];
    auto above = [&](std::size_t i) { return increasing ? row[i] >= level : row[i] <= level; };
    const double lo_v = std::min(row[0], row[n - 1]);
    const double hi_v = std::max(row[0], row[n - 1]);
    if (level < lo_v || level > hi_v) return NAN;
    // bisection on the node index, then the exact linear solve in the segment
    std::size_t a = 0, b = n - 1;
    while (b - a > 1) {
        const std::size_t m = a + (b - a) / 2;
        if (above(m)) b = m;
        else a = m;
    }
    const double ua = row[a], ub = row[b];
    if (ub == ua) return xs[a];
    const double w = (level - ua) / (ub - ua);
    return xs[a] + w * (xs[b] - xs[a]);
}

}  // namespace

RateResult lambda_prime(const CoefficientSet& c, const VolBounds& bounds, double x0,
                        std::span<const double> target_psi, const VIGrid& u0, const TimeGrid& grid,
                        const RateOptions& options) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (target_psi.size() != n + 1 || u0.t_nodes.size() != n + 1) {
        fail_argument("lambda_prime: target and field must match the grid");
    }
    for (std::size_t k = 0; k <= n; ++k) {
        const auto row = u0.u.row(k);
        const bool inc = row[1] > row[0];
        for (std::size_t i = 1; i < row.size(); ++i) {
            const bool ok = inc ? row[i] > row[i - 1] : row[i] < row[i - 1];
            if (!ok) {
                fail_numerical("preimage not unique: u0(t, .) is not strictly monotone at time index " +
                               std::to_string(k));
            }
        }
    }
    std::vector<double> phi_tilde(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double y = invert_row(u0.u.row(k), u0.x_nodes, target_psi[k]);
        if (std::isnan(y)) return RateResult::infinity(std::vector<double>(n + 1, NAN));
        phi_tilde[k] = y - x0;
    }
    if (std::abs(phi_tilde[0]) > 1e-9 * std::max(1.0, std::abs(x0))) {
        return RateResult::infinity(std::move(phi_tilde));
    }
    phi_tilde[0] = 0.0;
    return lambda_rate(c, bounds, x0, phi_tilde, grid, options);
}

std::string rate_result_json(const RateResult& r) {
    nlohmann::ordered_json j;
    if (r.infinite) {
        j["value"] = nullptr;
    } else {
        j["value"] = r.value;
    }
    j["infinite"] = r.infinite;
    j["phi_dot"] = r.optimal_control.phi_dot;
    j["eta_dot"] = r.optimal_control.eta_dot;
    nlohmann::ordered_json tgt = nlohmann::ordered_json::array();
    for (double v : r.target) {
        if (std::isfinite(v)) tgt.push_back(v);
        else tgt.push_back(nullptr);
    }
    j["target"] = std::move(tgt);
    return j.dump(2);
}

}  // namespace gldp
