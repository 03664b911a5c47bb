#include "gldp/vi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "gldp/error.hpp"
#include "gldp/format.hpp"
#include "gldp/numeric.hpp"
#include "gldp/rng.hpp"

namespace gldp {

namespace {

struct Cell {
    std::size_t i;
    double w;  // weight of node i + 1
};

Cell locate(const VIGrid& f, double x) {
    const std::size_t nx = f.x_nodes.size();
    double pos = (x - f.x_lo()) / f.dx;
    pos = std::clamp(pos, 0.0, static_cast<double>(nx - 1));
    auto i = static_cast<std::size_t>(pos);
    if (i >= nx - 1) i = nx - 2;
    return {i, pos - static_cast<double>(i)};
}

double node_slope(std::span<const double> row, std::size_t i, double dx) {
    const std::size_t n = row.size();
    if (i == 0) return (row[1] - row[0]) / dx;
    if (i == n - 1) return (row[n - 1] - row[n - 2]) / dx;
    return (row[i + 1] - row[i - 1]) / (2.0 * dx);
}

std::vector<double> uniform_nodes(double lo, double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const double dx = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) x[i] = (i == n - 1) ? hi : lo + i * dx;
    return x;
}

void check_window(const SpatialWindow& w) {
    if (!(w.x_lo < w.x_hi) || !std::isfinite(w.x_lo) || !std::isfinite(w.x_hi)) {
        fail_argument("spatial window: requires finite x_lo < x_hi");
    }
    if (w.nx < 8) fail_argument("spatial window: nx must be >= 8");
}

}  // namespace

double VIGrid::interpolate(const Field2D& f, std::size_t k, double x) const {
    const Cell c = locate(*this, x);
    return (1.0 - c.w) * f(k, c.i) + c.w * f(k, c.i + 1);
}

double VIGrid::slope(std::size_t k, double x) const {
    const Cell c = locate(*this, x);
    const auto r = u.row(k);
    return (1.0 - c.w) * node_slope(r, c.i, dx) + c.w * node_slope(r, c.i + 1, dx);
}

double max_monotone_dt(const CoefficientSet& c, const VolBounds& bounds, double eps,
                       const SpatialWindow& window) {
    check_window(window);
    const double dx = (window.x_hi - window.x_lo) / (window.nx - 1);
    double rate = 0.0;
    for (double x : uniform_nodes(window.x_lo, window.x_hi, window.nx)) {
        const double s = c.sigma(x);
        rate = std::max(rate, bounds.sigma_hi_sq * eps * eps * s * s / (dx * dx) + std::abs(c.b(x)) / dx);
    }
    return rate > 0.0 ? 1.0 / rate : INFINITY;
}

int choose_nx(const CoefficientSet& c, const VolBounds& bounds, double eps, double x_lo,
              double x_hi, double dt, int nx_max) {
    const double width = x_hi - x_lo;
    const auto cb = probe_coefficient_bounds(c, 0.5 * (x_lo + x_hi), 0.5 * width);
    const double diff = bounds.sigma_hi_sq * eps * eps * cb.sup_sigma * cb.sup_sigma;
    const double adv = cb.sup_b;
    constexpr double safety = 0.9;
    // largest w = 1/dx with dt (diff w^2 + adv w) <= safety
    double w;
    if (diff > 0.0) {
        w = (-adv + std::sqrt(adv * adv + 4.0 * diff * safety / dt)) / (2.0 * diff);
    } else if (adv > 0.0) {
        w = safety / (dt * adv);
    } else {
        w = static_cast<double>(nx_max);
    }
    const double n = std::floor(width * w) + 1.0;
    return static_cast<int>(std::clamp(n, 9.0, static_cast<double>(nx_max)));
}

SpatialWindow default_window(const CoefficientSet& c, const VolBounds& bounds, double x0,
                             double eps, const TimeGrid& grid, int nx_max) {
    const auto cb = probe_coefficient_bounds(c, x0);
    const double horizon = grid.T - grid.s;
    const double sigma_hi = std::sqrt(bounds.sigma_hi_sq);
    double r = cb.sup_b * horizon + 5.0 * eps * sigma_hi * cb.sup_sigma * std::sqrt(horizon) +
               eps * bounds.sigma_hi_sq * cb.sup_h * horizon;
    r = std::max(1.0, std::ceil(r));
    SpatialWindow w{x0 - r, x0 + r, 9};
    w.nx = choose_nx(c, bounds, eps, w.x_lo, w.x_hi, grid.dt, nx_max);
    return w;
}

VIGrid solve_vi(const CoefficientSet& c, const ConvexPenalty& penalty, const VolBounds& bounds,
                double eps, const SpatialWindow& window, const TimeGrid& grid,
                const VIOptions& options) {
    check_window(window);
    if (!(eps >= 0.0)) fail_argument("solve_vi: eps must be >= 0");
    const double limit = max_monotone_dt(c, bounds, eps, window);
    if (grid.dt > limit) {
        std::ostringstream os;
        os << "CFL violation in solve_vi: dt = " << grid.dt << " exceeds " << limit
           << "; use dt <= " << limit << " or a coarser space grid";
        fail_numerical(os.str());
    }

    const auto nt = static_cast<std::size_t>(grid.n_steps) + 1;
    const auto nx = static_cast<std::size_t>(window.nx);
    VIGrid out;
    out.eps = eps;
    out.t_nodes = grid.nodes();
    out.x_nodes = uniform_nodes(window.x_lo, window.x_hi, window.nx);
    out.dx = (window.x_hi - window.x_lo) / (window.nx - 1);
    out.u = Field2D(nt, nx);
    out.predictor = Field2D(nt, nx);

    const auto& xs = out.x_nodes;
    std::vector<double> bx(nx), hx(nx), sx(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        bx[i] = c.b(xs[i]);
        hx[i] = c.h(xs[i]);
        sx[i] = c.sigma(xs[i]);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        out.u(nt - 1, i) = penalty.project_domain(c.Phi(xs[i]));
        out.predictor(nt - 1, i) = out.u(nt - 1, i);
    }

    const double dx = out.dx;
    const double dt = grid.dt;
    const double eps2 = eps * eps;
    for (std::size_t k = nt - 1; k-- > 0;) {
        const double t = out.t_nodes[k];
        const auto next = out.u.row(k + 1);
        auto cur = out.u.row(k);
        auto pred_row = out.predictor.row(k);
        for (std::size_t i = 0; i < nx; ++i) {
            const double u = next[i];
            // Reflecting ghost node at the window edges keeps every weight nonnegative.
            const double left = i > 0 ? next[i - 1] : next[1];
            const double right = i + 1 < nx ? next[i + 1] : next[nx - 2];
            const double dxx = (right - 2.0 * u + left) / (dx * dx);
            const double d_central = (right - left) / (2.0 * dx);
            const double d_up = bx[i] >= 0.0 ? (right - u) / dx : (u - left) / dx;
            const double z = eps * sx[i] * d_central;
            const double H = dxx * eps2 * sx[i] * sx[i] + 2.0 * d_central * eps * hx[i] +
                             2.0 * c.g(t, xs[i], u, z);
            const double pred = u + dt * (g_function(H, bounds) + bx[i] * d_up + c.f(t, xs[i], u, z));
            pred_row[i] = pred;
            cur[i] = options.apply_prox ? penalty.prox(dt, pred) : pred;
            if (!std::isfinite(cur[i])) {
                fail_numerical("solve_vi: non-finite value at step " + std::to_string(k));
            }
        }
    }
    return out;
}

VIGrid limit_field_u0(const CoefficientSet& c, const ConvexPenalty& penalty,
                      const VolBounds& bounds, std::span<const double> x_nodes,
                      const TimeGrid& grid, unsigned workers) {
    if (x_nodes.size() < 2) fail_argument("limit_field_u0: need at least 2 space nodes");
    const auto nt = static_cast<std::size_t>(grid.n_steps) + 1;
    const std::size_t nx = x_nodes.size();
    VIGrid out;
    out.eps = 0.0;
    out.t_nodes = grid.nodes();
    out.x_nodes.assign(x_nodes.begin(), x_nodes.end());
    out.dx = (out.x_nodes.back() - out.x_nodes.front()) / static_cast<double>(nx - 1);
    for (std::size_t i = 1; i < nx; ++i) {
        if (std::abs(out.x_nodes[i] - out.x_nodes[i - 1] - out.dx) > 1e-9 * std::max(1.0, out.dx)) {
            fail_argument("limit_field_u0: x_nodes must be uniform and increasing");
        }
    }
    out.u = Field2D(nt, nx);
    out.predictor = Field2D(nt, nx);

    parallel_for(nx, workers, [&](std::size_t i) {
        const double x = out.x_nodes[i];
        const double terminal = penalty.project_domain(c.Phi(x));
        out.u(nt - 1, i) = terminal;
        out.predictor(nt - 1, i) = terminal;
        for (std::size_t k = 0; k + 1 < nt; ++k) {
            const TimeGrid sub{grid.node(static_cast<int>(k)), grid.T,
                               grid.n_steps - static_cast<int>(k), grid.dt};
            const auto phi = solve_limit_ode(c, x, sub);
            const auto psi = solve_limit_backward(c, penalty, bounds, phi, sub);
            out.u(k, i) = psi.psi[0];
            out.predictor(k, i) = psi.psi[0] + sub.dt * psi.u_sel[0];
        }
    });
    return out;
}

std::vector<double> eval_F(const VIGrid& field, double x0, std::span<const double> phi_tilde) {
    if (phi_tilde.size() != field.t_nodes.size()) {
        fail_argument("eval_F: path length does not match the field's time grid");
    }
    std::vector<double> out(phi_tilde.size());
    for (std::size_t k = 0; k < phi_tilde.size(); ++k) {
        const double x = x0 + phi_tilde[k];
        if (!field.contains(x)) {
            fail_argument("eval_F: query x = " + format_double(x) + " at time index " +
                          std::to_string(k) + " is outside the field window");
        }
        out[k] = field.value(k, x);
    }
    return out;
}

BackwardSolution reconstruct_backward(const VIGrid& field, const ForwardSolution& fx,
                                      const CoefficientSet& c, const ConvexPenalty& penalty,
                                      const GPath& path, const TimeGrid& grid) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (fx.x.size() != n + 1 || field.t_nodes.size() != n + 1 || path.b_incr.size() != n) {
        fail_argument("reconstruct_backward: inputs do not match the grid");
    }
    BackwardSolution bs;
    bs.y.resize(n + 1);
    bs.z.resize(n + 1);
    bs.k.assign(n + 1, 0.0);
    bs.u_sel.resize(n);
    const double eps = field.eps;
    const double dt = grid.dt;
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = fx.x[j];
        if (!field.contains(x)) {
            fail_numerical("forward path escaped the spatial window [" + format_double(field.x_lo()) +
                           ", " + format_double(field.x_hi()) + "] at step " + std::to_string(j));
        }
        bs.y[j] = j == n ? penalty.project_domain(c.Phi(x)) : field.value(j, x);
        bs.z[j] = eps * c.sigma(x) * field.slope(j, x);
        if (j < n) bs.u_sel[j] = penalty.yosida(dt, field.interpolate(field.predictor, j, x));
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double t = grid.node(static_cast<int>(j));
        const double x = fx.x[j];
        const double fj = c.f(t, x, bs.y[j], bs.z[j]);
        const double gj = c.g(t, x, bs.y[j], bs.z[j]);
        bs.k[j + 1] = bs.k[j] + (bs.y[j + 1] - bs.y[j]) + fj * dt - bs.u_sel[j] * dt +
                      gj * path.qv_incr[j] - bs.z[j] * path.b_incr[j];
    }
    return bs;
}

namespace {

struct PathErrors {
    double x = 0.0, y = 0.0, z = 0.0, k = 0.0;
};

struct PenaltyState {
    double y = 0.0, z = 0.0, u = 0.0, k = 0.0;
    double f = 0.0, g = 0.0;
    PathErrors e;
    CompensatedSum zz;
};

// One forward path under one scenario, read against every field at once.
// Performs exactly the floating-point operations of solve_forward followed by
// reconstruct_backward, without storing the paths.
void fused_path(const CoefficientSet& c, std::span<const ConvexPenalty> penalties,
                std::span<const VIGrid> fields, double eps, double x0, const Scenario& sc,
                std::span<const double> normals, const TimeGrid& grid, const LimitForward& phi,
                std::span<const LimitBackward> psis, std::span<const double* const> ms,
                std::span<PenaltyState> st) {
    const auto n = static_cast<std::size_t>(grid.n_steps);
    const double dt = grid.dt;
    const double sqrt_dt = std::sqrt(dt);
    const VIGrid& f0 = fields[0];
    const std::size_t nq = penalties.size();
    for (auto& s : st) s = PenaltyState{};
    double ex = 0.0;
    double x = x0;
    double db_prev = 0.0, dqv_prev = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        if (!f0.contains(x)) {
            fail_numerical("forward path escaped the spatial window [" + format_double(f0.x_lo()) + ", " +
                           format_double(f0.x_hi()) + "] at step " + std::to_string(j));
        }
        ex = std::max(ex, std::abs(x - phi.phi[j]));
        const double sig = c.sigma(x);
        const Cell cell = locate(f0, x);
        const double phi_x = j == n ? c.Phi(x) : 0.0;
        const double t = grid.node(static_cast<int>(j));
        for (std::size_t q = 0; q < nq; ++q) {
            const VIGrid& fld = fields[q];
            auto& s = st[q];
            const auto row = fld.u.row(j);
            const double y = j == n ? penalties[q].project_domain(phi_x)
                                    : (1.0 - cell.w) * row[cell.i] + cell.w * row[cell.i + 1];
            const double slope =
                (1.0 - cell.w) * node_slope(row, cell.i, fld.dx) + cell.w * node_slope(row, cell.i + 1, fld.dx);
            const double z = eps * sig * slope;
            if (j > 0) {
                s.k = s.k + (y - s.y) + s.f * dt - s.u * dt + s.g * dqv_prev - s.z * db_prev;
                s.e.k = std::max(s.e.k, std::abs(s.k - ms[q][j]));
            }
            s.e.y = std::max(s.e.y, std::abs(y - psis[q].psi[j]));
            s.y = y;
            s.z = z;
            if (j < n) {
                s.zz.add(z * z);
                const double pred = (1.0 - cell.w) * fld.predictor(j, cell.i) + cell.w * fld.predictor(j, cell.i + 1);
                s.u = penalties[q].yosida(dt, pred);
                s.f = c.f(t, x, y, z);
                s.g = c.g(t, x, y, z);
            }
        }
        if (j == n) break;
        const double v = sc.var_path[j];
        db_prev = std::sqrt(v) * sqrt_dt * normals[j];
        dqv_prev = v * dt;
        const double xn = x + c.b(x) * dt + eps * c.h(x) * dqv_prev + eps * sig * db_prev;
        if (!std::isfinite(xn) || std::abs(xn) > kBlowUpLevel) {
            fail_numerical("blow-up in forward equation at step " + std::to_string(j + 1));
        }
        x = xn;
    }
    for (auto& s : st) {
        s.e.x = ex * ex;
        s.e.y *= s.e.y;
        s.e.k *= s.e.k;
        s.e.z = s.zz.value() * dt;
    }
}

void check_ladder(std::span<const double> eps_ladder) {
    if (eps_ladder.size() < 3) fail_argument("convergence_experiment: eps ladder needs >= 3 entries");
    for (std::size_t i = 1; i < eps_ladder.size(); ++i) {
        if (!(eps_ladder[i] < eps_ladder[i - 1])) {
            fail_argument("convergence_experiment: eps ladder must be strictly decreasing");
        }
    }
    if (eps_ladder.back() <= 0.0) fail_argument("convergence_experiment: eps must be > 0");
    if (eps_ladder.front() > 1.0) fail_argument("convergence_experiment: eps must be <= 1");
}

}  // namespace

std::vector<ConvergenceReport> convergence_experiment(const CoefficientSet& c,
                                                      std::span<const ConvexPenalty> penalties,
                                                      const VolBounds& bounds, double x0,
                                                      std::span<const double> eps_ladder,
                                                      const ScenarioFamily& family, std::size_t n_paths,
                                                      const TimeGrid& grid, const ConvergenceOptions& options) {
    check_ladder(eps_ladder);
    if (penalties.empty()) fail_argument("convergence_experiment: no penalty given");
    if (family.empty()) fail_argument("convergence_experiment: empty scenario family");
    if (n_paths == 0) fail_argument("convergence_experiment: n_paths must be >= 1");
    const std::size_t n = static_cast<std::size_t>(grid.n_steps);
    for (const auto& sc : family) {
        if (sc.var_path.size() != n) fail_argument("convergence_experiment: scenario does not match the grid");
    }

    const std::size_t nq = penalties.size();
    const std::size_t ns = family.size();
    const auto phi = solve_limit_ode(c, x0, grid);
    std::vector<LimitBackward> psis;
    for (const auto& pen : penalties) psis.push_back(solve_limit_backward(c, pen, bounds, phi, grid));
    // the limit martingale only sees d<B>, which does not depend on the normals
    const std::vector<double> zeros(n, 0.0);
    std::vector<std::vector<double>> mart(ns * nq);  // [scenario][penalty]
    for (std::size_t s = 0; s < ns; ++s) {
        const auto path = build_g_path(family[s], grid, zeros);
        for (std::size_t q = 0; q < nq; ++q) {
            mart[s * nq + q] = build_limit_martingale(c, bounds, phi, psis[q], path, grid, family[s].id).m;
        }
    }

    std::vector<ConvergenceReport> reports(nq);
    for (auto& r : reports) {
        r.family_size = ns;
        r.n_paths = n_paths;
    }

    for (double eps : eps_ladder) {
        const SpatialWindow window = options.window ? *options.window : default_window(c, bounds, x0, eps, grid);
        std::vector<VIGrid> fields;
        for (const auto& pen : penalties) fields.push_back(solve_vi(c, pen, bounds, eps, window, grid));

        std::vector<PathErrors> errs(n_paths * ns * nq);  // [path][scenario][penalty]
        parallel_for(n_paths, options.workers, [&](std::size_t p) {
            const auto normals = gaussian_driver(options.seed, p, n);
            std::vector<PenaltyState> st(nq);
            for (std::size_t s = 0; s < ns; ++s) {
                std::vector<const double*> m_ptr(nq);
                for (std::size_t q = 0; q < nq; ++q) m_ptr[q] = mart[s * nq + q].data();
                fused_path(c, penalties, fields, eps, x0, family[s], normals, grid, phi, psis, m_ptr, st);
                for (std::size_t q = 0; q < nq; ++q) errs[(p * ns + s) * nq + q] = st[q].e;
            }
        });

        for (std::size_t q = 0; q < nq; ++q) {
            auto reduce = [&](double PathErrors::*member) {
                ScenarioSamples samples(ns);
                for (std::size_t s = 0; s < ns; ++s) {
                    samples[s].id = family[s].id;
                    samples[s].values.resize(n_paths);
                    for (std::size_t p = 0; p < n_paths; ++p) {
                        samples[s].values[p] = errs[(p * ns + s) * nq + q].*member;
                    }
                }
                return sublinear_estimate(samples);
            };
            const auto ex = reduce(&PathErrors::x);
            const auto ey = reduce(&PathErrors::y);
            const auto ez = reduce(&PathErrors::z);
            const auto ek = reduce(&PathErrors::k);
            reports[q].rows.push_back({eps, ex.value, ey.value, ez.value, ek.value, ex.argmax_id, ey.argmax_id,
                                       ez.argmax_id, ek.argmax_id, window.nx, window.x_lo, window.x_hi});
        }
    }

    // identically zero error curves (e.g. K = M on linear fields) have no slope
    auto fit = [&](const ConvergenceReport& r, double ConvergenceRow::*member) {
        std::vector<double> xs, ys;
        for (const auto& row : r.rows) {
            if (!(row.*member > 0.0)) return SlopeFit{NAN, NAN, NAN};
            xs.push_back(row.eps);
            ys.push_back(row.*member);
        }
        return fit_loglog(xs, ys);
    };
    for (auto& r : reports) {
        r.slope_X = fit(r, &ConvergenceRow::e_X);
        r.slope_Y = fit(r, &ConvergenceRow::e_Y);
        r.slope_Z = fit(r, &ConvergenceRow::e_Z);
        r.slope_K = fit(r, &ConvergenceRow::e_K);
    }
    return reports;
}

ConvergenceReport convergence_experiment(const CoefficientSet& c, const ConvexPenalty& penalty,
                                         const VolBounds& bounds, double x0,
                                         std::span<const double> eps_ladder,
                                         const ScenarioFamily& family, std::size_t n_paths,
                                         const TimeGrid& grid, const ConvergenceOptions& options) {
    return convergence_experiment(c, std::span<const ConvexPenalty>(&penalty, 1), bounds, x0, eps_ladder, family,
                                  n_paths, grid, options)
        .front();
}

void write_field_csv(const VIGrid& field, std::ostream& out) {
    out << "t";
    for (double x : field.x_nodes) out << ',' << format_double(x);
    out << "\r\n";
    for (std::size_t k = 0; k < field.t_nodes.size(); ++k) {
        out << format_double(field.t_nodes[k]);
        for (std::size_t i = 0; i < field.x_nodes.size(); ++i) out << ',' << format_double(field.u(k, i));
        out << "\r\n";
    }
}

}  // namespace gldp
