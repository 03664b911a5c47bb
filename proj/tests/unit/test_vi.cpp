#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gldp/error.hpp"
#include "gldp/numeric.hpp"
#include "gldp/vi.hpp"

using namespace gldp;

namespace {

double inner_half_gap(const VIGrid& coarse, const VIGrid& fine, std::size_t t_ratio, std::size_t x_ratio) {
    const std::size_t nx = coarse.x_nodes.size();
    const double lo = coarse.x_lo() + 0.25 * (coarse.x_hi() - coarse.x_lo());
    const double hi = coarse.x_hi() - 0.25 * (coarse.x_hi() - coarse.x_lo());
    double gap = 0;
    for (std::size_t k = 0; k < coarse.t_nodes.size(); ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            if (coarse.x_nodes[i] < lo || coarse.x_nodes[i] > hi) continue;
            gap = std::max(gap, std::abs(coarse.u(k, i) - fine.u(k * t_ratio, i * x_ratio)));
        }
    }
    return gap;
}

}  // namespace

TEST(Vi, LinearFieldMatchesReflectedHeatKernel) {
    // For Phi = x and G linear the field is E[x + reflected Brownian motion];
    // by the method of images its excess over x at distance d from an edge is
    // 2 (s phi(d/s) - d Phibar(d/s)) with s = eps sqrt(T - t).
    const auto c = flat_preset();
    const auto g = make_time_grid(0, 1, 400);
    const SpatialWindow w{-2, 2, 81};
    const double eps = 0.3;
    const auto f = solve_vi(c, ConvexPenalty::zero(), VolBounds{1, 1}, eps, w, g);
    const double s = eps;
    auto image = [s](double d) {
        const double z = d / s;
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        const double tail = 0.5 * std::erfc(z / std::sqrt(2.0));
        return 2.0 * (s * pdf - d * tail);
    };
    for (std::size_t i = 0; i < 81; ++i) {
        const double x = f.x_nodes[i];
        const double excess = x <= 0.0 ? image(x + 2.0) : -image(2.0 - x);
        EXPECT_NEAR(f.u(0, i) - x, excess, 0.1 * std::abs(excess) + 1e-6) << "x = " << x;
    }
    EXPECT_NEAR(f.u(0, 40), 0.0, 1e-12);
}

TEST(Vi, EdgeClosureReflects) {
    // First backward step from Phi = x: interior nodes keep x, the edge node
    // sees the ghost value u_{-1} = u_1.
    const auto c = flat_preset();
    const auto g = make_time_grid(0, 0.001, 1);
    const SpatialWindow w{-1, 1, 21};
    const VolBounds b{1, 4};
    const double eps = 0.5;
    const auto f = solve_vi(c, ConvexPenalty::zero(), b, eps, w, g);
    const double dx = 0.1;
    const double h_edge = eps * eps * 2.0 * dx / (dx * dx);
    EXPECT_DOUBLE_EQ(f.u(0, 0), -1.0 + g.dt * g_function(h_edge, b));
    EXPECT_DOUBLE_EQ(f.u(0, 20), 1.0 + g.dt * g_function(-h_edge, b));
    for (std::size_t i = 1; i < 20; ++i) EXPECT_NEAR(f.u(0, i), f.x_nodes[i], 1e-15);
}

TEST(Vi, ProxFreeCollapseIsBitIdentical) {
    const auto c = tanh_drift_preset();
    const auto g = make_time_grid(0, 1, 500);
    const auto w = default_window(c, VolBounds{1, 4}, 0.5, 0.1, g);
    const auto a = solve_vi(c, ConvexPenalty::zero(), VolBounds{1, 4}, 0.1, w, g);
    const auto b = solve_vi(c, ConvexPenalty::zero(), VolBounds{1, 4}, 0.1, w, g, VIOptions{false});
    EXPECT_TRUE(a.u == b.u);
    const auto p = solve_vi(c, ConvexPenalty::indicator_interval(-1, 1), VolBounds{1, 4}, 0.1, w, g);
    EXPECT_FALSE(p.u == a.u);
}

TEST(Vi, CflViolationIsNumerical) {
    const auto c = tanh_drift_preset();
    const auto g = make_time_grid(0, 1, 10);
    try {
        solve_vi(c, ConvexPenalty::zero(), VolBounds{1, 4}, 0.5, SpatialWindow{-3, 3, 2001}, g);
        FAIL() << "no CFL error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
        EXPECT_NE(std::string(e.what()).find("use dt <="), std::string::npos);
    }
    const auto w = default_window(c, VolBounds{1, 4}, 0.0, 0.5, g);
    EXPECT_LE(g.dt, max_monotone_dt(c, VolBounds{1, 4}, 0.5, w));
}

TEST(Vi, RefinementTanhDrift) {
    const auto c = tanh_drift_preset();
    const VolBounds b{1, 4};
    const auto g = make_time_grid(0, 1, 1000);
    const auto g4 = make_time_grid(0, 1, 4000);
    const auto w = default_window(c, b, 0.5, 0.1, g);
    SpatialWindow w2 = w;
    w2.nx = 2 * (w.nx - 1) + 1;
    for (const auto& p : {ConvexPenalty::zero(), ConvexPenalty::indicator_interval(-1, 1)}) {
        const auto coarse = solve_vi(c, p, b, 0.1, w, g);
        const auto fine = solve_vi(c, p, b, 0.1, w2, g4);
        EXPECT_LE(inner_half_gap(coarse, fine, 4, 2), 0.01) << p.describe();
    }
}

TEST(Vi, ComparisonMonotone) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ua(0.0, 0.5), uk(0.5, 3.0), uph(0.0, 6.0);
    const VolBounds b{1, 4};
    const auto g = make_time_grid(0, 1, 400);
    const auto base = tanh_drift_preset();
    const SpatialWindow w = default_window(base, b, 0.0, 0.2, g);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = ua(rng), k = uk(rng), ph = uph(rng);
        auto up = base;
        up.Phi = [a, k, ph](double x) { return std::atan(x) + a * (1.0 + std::sin(k * x + ph)); };
        const auto lo_f = solve_vi(base, ConvexPenalty::zero(), b, 0.2, w, g);
        const auto hi_f = solve_vi(up, ConvexPenalty::zero(), b, 0.2, w, g);
        for (std::size_t r = 0; r < lo_f.u.rows(); ++r) {
            for (std::size_t i = 0; i < lo_f.u.cols(); ++i) ASSERT_LE(lo_f.u(r, i), hi_f.u(r, i));
        }
    }
}

TEST(Vi, LimitFieldAgreesWithLimitSolve) {
    const auto c = tanh_drift_preset();
    const VolBounds b{1, 4};
    const auto g = make_time_grid(0, 1, 200);
    std::vector<double> xs;
    for (int i = 0; i <= 20; ++i) xs.push_back(-1.0 + 0.1 * i);
    const auto p = ConvexPenalty::indicator_interval(-1, 1);
    const auto u0 = limit_field_u0(c, p, b, xs, g, 2);
    const auto psi = solve_limit_backward(c, p, b, solve_limit_ode(c, xs[15], g), g);
    EXPECT_EQ(u0.u(0, 15), psi.psi[0]);
    const auto u0_serial = limit_field_u0(c, p, b, xs, g, 1);
    EXPECT_TRUE(u0.u == u0_serial.u);

    const auto flat = limit_field_u0(flat_preset(), ConvexPenalty::zero(), b, xs, g);
    for (std::size_t k = 0; k <= 200; ++k) {
        for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(flat.u(k, i), xs[i]);
    }
    std::vector<double> phi_t(201);
    for (std::size_t k = 0; k <= 200; ++k) phi_t[k] = 0.3 * std::sin(3.0 * k / 200.0);
    const auto F = eval_F(flat, 0.1, phi_t);
    for (std::size_t k = 0; k <= 200; ++k) EXPECT_NEAR(F[k], 0.1 + phi_t[k], 1e-14);
    phi_t[50] = 5.0;
    EXPECT_THROW(eval_F(flat, 0.1, phi_t), Error);
}

TEST(Vi, ReconstructFlat) {
    const auto c = flat_preset();
    const VolBounds b{1, 4};
    const auto g = make_time_grid(0, 1, 400);
    const double eps = 0.2;
    // 10 standard deviations to each edge, so the reflection bias is below rounding.
    const SpatialWindow w{-4, 4, choose_nx(c, b, eps, -4, 4, g.dt)};
    const auto f = solve_vi(c, ConvexPenalty::zero(), b, eps, w, g);
    for (const auto& sc : scenario_family(b, g, 2, 1)) {
        const auto path = build_g_path(sc, g, 1, 3);
        const auto fx = solve_forward(c, eps, 0.0, path, sc, g, 3);
        const auto bw = reconstruct_backward(f, fx, c, ConvexPenalty::zero(), path, g);
        for (std::size_t j = 0; j <= 400; ++j) {
            EXPECT_NEAR(bw.y[j], eps * path.b[j], 1e-12);
            EXPECT_NEAR(bw.z[j], eps, 1e-9);
            EXPECT_NEAR(bw.k[j], 0.0, 1e-9);
        }
    }
}

TEST(Vi, ReconstructEscapeIsNumerical) {
    const auto c = flat_preset();
    const VolBounds b{1, 4};
    const auto g = make_time_grid(0, 1, 100);
    const auto f = solve_vi(c, ConvexPenalty::zero(), b, 0.0, SpatialWindow{-0.05, 0.05, 9}, g);
    const auto sc = scenario_family(b, g, 0, 1)[kScenarioHigh];
    const auto path = build_g_path(sc, g, 1, 0);
    const auto fx = solve_forward(c, 1.0, 0.0, path, sc, g);
    try {
        reconstruct_backward(f, fx, c, ConvexPenalty::zero(), path, g);
        FAIL() << "no escape error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
    }
}

TEST(Convergence, FusedKernelMatchesReference) {
    const auto c = tanh_drift_preset();
    const VolBounds b{1, 4};
    const auto g = make_time_grid(0, 1, 200);
    const auto fam = scenario_family(b, g, 2, 5);
    const std::vector<double> ladder{0.4, 0.2, 0.1};
    const std::vector<ConvexPenalty> pens{ConvexPenalty::zero(), ConvexPenalty::indicator_interval(-1, 1)};
    const std::size_t n_paths = 12;
    ConvergenceOptions opt;
    opt.workers = 3;
    opt.seed = 9;
    const auto reps = convergence_experiment(c, pens, b, 0.5, ladder, fam, n_paths, g, opt);
    ASSERT_EQ(reps.size(), 2u);
    const auto phi = solve_limit_ode(c, 0.5, g);
    for (std::size_t q = 0; q < pens.size(); ++q) {
        const auto psi = solve_limit_backward(c, pens[q], b, phi, g);
        for (std::size_t e = 0; e < ladder.size(); ++e) {
            const auto field = solve_vi(c, pens[q], b, ladder[e], default_window(c, b, 0.5, ladder[e], g), g);
            ScenarioSamples sx, sy, sz, sk;
            for (const auto& sc : fam) {
                const auto m = build_limit_martingale(c, b, phi, psi, build_g_path(sc, g, 9, 0), g, sc.id);
                ScenarioSample ax{sc.id, {}}, ay{sc.id, {}}, az{sc.id, {}}, ak{sc.id, {}};
                for (std::size_t p = 0; p < n_paths; ++p) {
                    const auto path = build_g_path(sc, g, 9, p);
                    const auto fx = solve_forward(c, ladder[e], 0.5, path, sc, g, p);
                    const auto bw = reconstruct_backward(field, fx, c, pens[q], path, g);
                    double mx = 0, my = 0, mk = 0;
                    CompensatedSum zz;
                    for (std::size_t j = 0; j < fx.x.size(); ++j) {
                        mx = std::max(mx, std::abs(fx.x[j] - phi.phi[j]));
                        my = std::max(my, std::abs(bw.y[j] - psi.psi[j]));
                        mk = std::max(mk, std::abs(bw.k[j] - m.m[j]));
                        if (j + 1 < fx.x.size()) zz.add(bw.z[j] * bw.z[j]);
                    }
                    ax.values.push_back(mx * mx);
                    ay.values.push_back(my * my);
                    az.values.push_back(zz.value() * g.dt);
                    ak.values.push_back(mk * mk);
                }
                sx.push_back(ax);
                sy.push_back(ay);
                sz.push_back(az);
                sk.push_back(ak);
            }
            const auto& row = reps[q].rows[e];
            EXPECT_EQ(row.e_X, sublinear_expectation(sx));
            EXPECT_EQ(row.e_Y, sublinear_expectation(sy));
            EXPECT_EQ(row.e_Z, sublinear_expectation(sz));
            EXPECT_EQ(row.e_K, sublinear_expectation(sk));
        }
    }
    // single-penalty runs and other worker counts give the same rows
    opt.workers = 1;
    const auto single = convergence_experiment(c, pens[1], b, 0.5, ladder, fam, n_paths, g, opt);
    for (std::size_t e = 0; e < ladder.size(); ++e) {
        EXPECT_EQ(single.rows[e].e_Y, reps[1].rows[e].e_Y);
        EXPECT_EQ(single.rows[e].e_K, reps[1].rows[e].e_K);
    }
}

TEST(Convergence, FlatSlopeIsTwo) {
    const auto c = flat_preset();
    const VolBounds b{1, 4};
    const auto g = make_time_grid(0, 1, 200);
    const std::vector<double> ladder{0.4, 0.2, 0.1, 0.05};
    const auto rep = convergence_experiment(c, ConvexPenalty::zero(), b, 0.0, ladder, scenario_family(b, g, 2, 1),
                                            50, g);
    EXPECT_NEAR(rep.slope_X.slope, 2.0, 1e-12);
    EXPECT_NEAR(rep.slope_Y.slope, 2.0, 1e-6);
    EXPECT_NEAR(rep.slope_Z.slope, 2.0, 1e-6);
    EXPECT_NEAR(rep.rows.back().e_Z, 0.05 * 0.05, 1e-9);  // Z = eps, so int |Z|^2 dr = eps^2 T
    EXPECT_EQ(rep.family_size, 5u);
}

TEST(Convergence, InputChecks) {
    const auto c = flat_preset();
    const auto g = make_time_grid(0, 1, 10);
    const auto fam = scenario_family(VolBounds{1, 1}, g, 0, 1);
    const std::vector<double> short_ladder{0.2, 0.1};
    const std::vector<double> bad_ladder{0.1, 0.2, 0.05};
    EXPECT_THROW(convergence_experiment(c, ConvexPenalty::zero(), VolBounds{1, 1}, 0, short_ladder, fam, 5, g), Error);
    EXPECT_THROW(convergence_experiment(c, ConvexPenalty::zero(), VolBounds{1, 1}, 0, bad_ladder, fam, 5, g), Error);
}

TEST(Vi, FieldCsv) {
    const auto g = make_time_grid(0, 1, 2);
    const auto f = solve_vi(flat_preset(), ConvexPenalty::zero(), VolBounds{1, 1}, 0.0, SpatialWindow{0, 1, 9}, g);
    std::ostringstream os;
    write_field_csv(f, os);
    const auto s = os.str();
    EXPECT_EQ(s.substr(0, 10), "t,0,0.125,");
    EXPECT_EQ(s.substr(s.size() - 2), "\r\n");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}
