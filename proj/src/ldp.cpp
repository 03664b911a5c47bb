#include "gldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gldp/error.hpp"
#include "gldp/forward.hpp"
#include "gldp/limitbw.hpp"
#include "gldp/numeric.hpp"
#include "gldp/rng.hpp"
#include "gldp/vi.hpp"

namespace gldp {

SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) fail_argument("fit_slope: need at least 3 points");
    for (const auto& [x, y] : points) {
        if (!std::isfinite(x) || !std::isfinite(y)) fail_argument("fit_slope: non-finite point");
    }
    const double n = static_cast<double>(points.size());
    CompensatedSum sx, sy;
    for (const auto& [x, y] : points) {
        sx.add(x);
        sy.add(y);
    }
    const double mx = sx.value() / n;
    const double my = sy.value() / n;
    CompensatedSum sxx, sxy, syy;
    for (const auto& [x, y] : points) {
        sxx.add((x - mx) * (x - mx));
        sxy.add((x - mx) * (y - my));
        syy.add((y - my) * (y - my));
    }
    if (!(sxx.value() > 0.0)) fail_argument("fit_slope: x values are all equal");
    SlopeFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy.value() > 0.0 ? (sxy.value() * sxy.value()) / (sxx.value() * syy.value()) : 1.0;
    return fit;
}

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail_argument("fit_loglog: size mismatch");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail_argument("fit_loglog: values must be > 0");
        pts.emplace_back(std::log(x[i]), std::log(y[i]));
    }
    return fit_slope(pts);
}

void EventSpec::validate() const {
    if (!std::isfinite(param)) fail_argument("event: parameter must be finite");
    if (kind == Kind::exit_ball && !(param > 0.0)) fail_argument("event: exit_ball radius must be > 0");
}

bool EventSpec::contains(std::span<const double> u_path) const {
    if (u_path.empty()) return false;
    if (kind == Kind::terminal_above) return u_path.back() >= param;
    for (double u : u_path) {
        if (std::abs(u) >= param) return true;
    }
    return false;
}

std::vector<LdpPoint> empirical_ldp_curve(const EventSpec& spec, const CoefficientSet& c,
                                          const ConvexPenalty& penalty, const VolBounds& bounds,
                                          double x0, std::span<const double> eps_ladder,
                                          const ScenarioFamily& family, std::size_t n_paths,
                                          const TimeGrid& grid, const LdpOptions& options) {
    spec.validate();
    if (eps_ladder.size() < 3) fail_argument("empirical_ldp_curve: eps ladder needs >= 3 entries");
    if (n_paths < 1000) fail_argument("empirical_ldp_curve: n_paths must be >= 1000");
    if (family.empty()) fail_argument("empirical_ldp_curve: empty scenario family");
    for (double e : eps_ladder) {
        if (!(e > 0.0 && e <= 1.0)) fail_argument("empirical_ldp_curve: eps must lie in (0, 1]");
    }

    const bool backward = spec.applied_to == EventSpec::AppliedTo::backward_y;
    const std::size_t n = static_cast<std::size_t>(grid.n_steps);
    const std::size_t ns = family.size();
    double psi_start = 0.0;
    if (backward) {
        const auto phi = solve_limit_ode(c, x0, grid);
        psi_start = solve_limit_backward(c, penalty, bounds, phi, grid).psi[0];
    }

    std::vector<LdpPoint> curve;
    for (double eps : eps_ladder) {
        const double noise = std::sqrt(eps);
        VIGrid field;
        if (backward) {
            field = solve_vi(c, penalty, bounds, noise, default_window(c, bounds, x0, noise, grid), grid);
        }
        std::vector<unsigned char> hits(n_paths * ns, 0);
        parallel_for(n_paths, options.workers, [&](std::size_t p) {
            const auto normals = gaussian_driver(options.seed, p, n);
            std::vector<double> u(n + 1);
            for (std::size_t s = 0; s < ns; ++s) {
                const auto path = build_g_path(family[s], grid, normals);
                const auto fx = solve_forward(c, noise, x0, path, family[s], grid, p);
                if (backward) {
                    const auto bw = reconstruct_backward(field, fx, c, penalty, path, grid);
                    for (std::size_t j = 0; j <= n; ++j) u[j] = bw.y[j] - psi_start;
                } else {
                    for (std::size_t j = 0; j <= n; ++j) u[j] = fx.x[j] - x0;
                }
                hits[p * ns + s] = spec.contains(u) ? 1 : 0;
            }
        });
        ScenarioSamples ind(ns);
        for (std::size_t s = 0; s < ns; ++s) {
            ind[s].id = family[s].id;
            ind[s].values.resize(n_paths);
            for (std::size_t p = 0; p < n_paths; ++p) ind[s].values[p] = hits[p * ns + s];
        }
        const auto est = sublinear_estimate(ind);
        LdpPoint pt;
        pt.eps = eps;
        pt.capacity = est.value;
        pt.eps_log_capacity =
            est.value > 0.0 ? eps * std::log(est.value) : -std::numeric_limits<double>::infinity();
        pt.n_paths = n_paths;
        pt.argmax_scenario_id = est.argmax_id;
        pt.n_hits = static_cast<std::size_t>(std::llround(est.value * static_cast<double>(n_paths)));
        curve.push_back(pt);
    }
    return curve;
}

RateHandle forward_rate_handle(const CoefficientSet& c, const VolBounds& bounds, double x0,
                               const TimeGrid& grid, const RateOptions& options) {
    RateHandle h;
    h.grid = grid;
    const auto phi = solve_limit_ode(c, x0, grid);
    h.lln_path.resize(phi.phi.size());
    for (std::size_t k = 0; k < phi.phi.size(); ++k) h.lln_path[k] = phi.phi[k] - x0;
    h.rate = [c, bounds, x0, grid, options](std::span<const double> u) {
        try {
            return lambda_rate(c, bounds, x0, u, grid, options).value;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::numerical) return std::numeric_limits<double>::infinity();
            throw;
        }
    };
    return h;
}

RateHandle backward_rate_handle(const CoefficientSet& c, const ConvexPenalty& penalty,
                                const VolBounds& bounds, double x0, const VIGrid& u0,
                                const TimeGrid& grid, const RateOptions& options) {
    RateHandle h;
    h.grid = grid;
    const auto phi = solve_limit_ode(c, x0, grid);
    const auto psi = solve_limit_backward(c, penalty, bounds, phi, grid);
    const double start = psi.psi[0];
    h.lln_path.resize(psi.psi.size());
    for (std::size_t k = 0; k < psi.psi.size(); ++k) h.lln_path[k] = psi.psi[k] - start;
    h.rate = [c, bounds, x0, &u0, grid, options, start](std::span<const double> u) {
        std::vector<double> target(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) target[k] = start + u[k];
        try {
            return lambda_prime(c, bounds, x0, target, u0, grid, options).value;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::numerical) return std::numeric_limits<double>::infinity();
            throw;
        }
    };
    return h;
}

double theoretical_rate_inf(const EventSpec& spec, const RateHandle& handle, int candidate_family_size) {
    spec.validate();
    if (candidate_family_size < 1) fail_argument("theoretical_rate_inf: family size must be >= 1");
    const auto& lln = handle.lln_path;
    const std::size_t n = lln.size() - 1;
    if (n < 1) fail_argument("theoretical_rate_inf: grid too short");
    if (spec.contains(lln)) return 0.0;

    const auto m = static_cast<std::size_t>(candidate_family_size);
    auto node_of = [&](std::size_t j) {
        return static_cast<std::size_t>(std::llround(static_cast<double>(j) * static_cast<double>(n) /
                                                     static_cast<double>(m)));
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> cand(n + 1);
    auto consider = [&] {
        if (!spec.contains(cand)) return;
        best = std::min(best, handle.rate(cand));
    };

    if (spec.kind == EventSpec::Kind::exit_ball) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t tau = std::max<std::size_t>(1, node_of(j));
            for (double sign : {1.0, -1.0}) {
                const double level = sign * spec.param;
                for (int shape = 0; shape < 2; ++shape) {
                    for (int tail = 0; tail < 2; ++tail) {
                        for (std::size_t k = 0; k <= n; ++k) {
                            if (k <= tau) {
                                const double w = static_cast<double>(k) / static_cast<double>(tau);
                                cand[k] = shape == 0 ? level * w : lln[k] + (level - lln[tau]) * w;
                            } else {
                                cand[k] = tail == 0 ? level : level + (lln[k] - lln[tau]);
                            }
                        }
                        consider();
                    }
                }
            }
        }
    } else {
        const double level = spec.param;
        for (std::size_t k = 0; k <= n; ++k) cand[k] = level * static_cast<double>(k) / static_cast<double>(n);
        consider();
        for (std::size_t k = 0; k <= n; ++k) {
            cand[k] = lln[k] + (level - lln[n]) * static_cast<double>(k) / static_cast<double>(n);
        }
        consider();
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t tau = node_of(j);
            if (tau >= n) continue;
            for (std::size_t k = 0; k <= n; ++k) {
                if (k <= tau) {
                    cand[k] = lln[k];
                } else {
                    const double w = static_cast<double>(k - tau) / static_cast<double>(n - tau);
                    cand[k] = lln[tau] + (level - lln[tau]) * w;
                }
            }
            consider();
        }
    }
    return best;
}

}  // namespace gldp
