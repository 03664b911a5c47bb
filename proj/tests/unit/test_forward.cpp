#include <gtest/gtest.h>

#include <cmath>

#include "gldp/error.hpp"
#include "gldp/forward.hpp"
#include "gldp/rng.hpp"

using namespace gldp;

TEST(Forward, FlatIsScaledBrownianPath) {
    const auto c = flat_preset();
    const VolBounds b{1.0, 4.0};
    const auto g = make_time_grid(0, 1, 500);
    for (const auto& sc : scenario_family(b, g, 2, 1)) {
        const auto path = build_g_path(sc, g, 3, 4);
        const auto fx = solve_forward(c, 0.3, 0.25, path, sc, g, 4);
        ASSERT_EQ(fx.x.size(), 501u);
        EXPECT_EQ(fx.x[0], 0.25);
        EXPECT_EQ(fx.scenario_id, sc.id);
        for (std::size_t k = 0; k <= 500; ++k) EXPECT_NEAR(fx.x[k], 0.25 + 0.3 * path.b[k], 1e-13);
    }
}

TEST(Forward, ZeroNoiseIsEulerOfLimit) {
    const auto c = tanh_drift_preset();
    const auto g = make_time_grid(0, 1, 2000);
    const auto sc = scenario_family(VolBounds{1, 4}, g, 0, 1)[kScenarioHigh];
    const auto fx = solve_forward(c, 0.0, 0.7, build_g_path(sc, g, 1, 0), sc, g);
    const auto phi = solve_limit_ode(c, 0.7, g);
    for (std::size_t k = 0; k <= 2000; ++k) EXPECT_NEAR(fx.x[k], phi.phi[k], 1e-3);
}

TEST(Forward, SelfConvergenceTanhDrift) {
    // coarse increments are sums of ten fine increments of the same Brownian path
    const auto c = tanh_drift_preset();
    const auto coarse = make_time_grid(0, 1, 1000);
    const auto fine = make_time_grid(0, 1, 10000);
    const double v = 2.0;
    Scenario sc_c{0, std::vector<double>(1000, v)}, sc_f{0, std::vector<double>(10000, v)};
    for (std::uint64_t p = 0; p < 5; ++p) {
        const auto zf = gaussian_driver(11, p, 10000);
        std::vector<double> zc(1000);
        for (std::size_t k = 0; k < 1000; ++k) {
            double s = 0;
            for (int j = 0; j < 10; ++j) s += zf[10 * k + j];
            zc[k] = s / std::sqrt(10.0);
        }
        const auto xc = solve_forward(c, 0.1, 0.5, build_g_path(sc_c, coarse, zc), sc_c, coarse);
        const auto xf = solve_forward(c, 0.1, 0.5, build_g_path(sc_f, fine, zf), sc_f, fine);
        double gap = 0;
        for (std::size_t k = 0; k <= 1000; ++k) gap = std::max(gap, std::abs(xc.x[k] - xf.x[10 * k]));
        EXPECT_LE(gap, 0.05);
    }
}

TEST(Forward, Errors) {
    const auto c = flat_preset();
    const auto g = make_time_grid(0, 1, 10);
    const auto sc = scenario_family(VolBounds{1, 1}, g, 0, 1)[0];
    const auto path = build_g_path(sc, g, 1, 0);
    EXPECT_THROW(solve_forward(c, 1.5, 0.0, path, sc, g), Error);
    EXPECT_THROW(solve_forward(c, -0.1, 0.0, path, sc, g), Error);
    auto wild = flat_preset();
    wild.b = [](double x) { return 1e4 * x * x; };
    try {
        solve_forward(wild, 0.0, 1.0, path, sc, g);
        FAIL() << "no blow-up";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
    }
}

TEST(LimitOde, ClosedForms) {
    const auto g = make_time_grid(0, 1, 200);
    auto c = flat_preset();
    for (double v : solve_limit_ode(c, 1.3, g).phi) EXPECT_EQ(v, 1.3);
    c = tanh_drift_preset();
    for (double v : solve_limit_ode(c, 0.0, g).phi) EXPECT_EQ(v, 0.0);
    // sinh(phi_t) = sinh(x0) e^t solves phi' = tanh(phi)
    const auto phi = solve_limit_ode(c, 1.0, g);
    for (int k = 0; k <= 200; ++k) {
        EXPECT_NEAR(phi.phi[k], std::asinh(std::sinh(1.0) * std::exp(g.node(k))), 1e-9);
    }
}

TEST(LimitOde, RefinementTanh) {
    const auto c = tanh_drift_preset();
    const auto a = solve_limit_ode(c, 1.0, make_time_grid(0, 1, 100));
    const auto b = solve_limit_ode(c, 1.0, make_time_grid(0, 1, 1000));
    EXPECT_NEAR(a.phi.back(), b.phi.back(), 1e-8);
}

TEST(ForwardError, FlatScalesExactlyQuadratically) {
    const auto c = flat_preset();
    const VolBounds bd{1, 4};
    const auto g = make_time_grid(0, 1, 100);
    const auto fam = scenario_family(bd, g, 2, 1);
    const auto phi = solve_limit_ode(c, 0.0, g);
    auto err = [&](double eps) {
        std::vector<ForwardSolution> batch;
        for (const auto& sc : fam) {
            for (std::uint64_t p = 0; p < 200; ++p) {
                batch.push_back(solve_forward(c, eps, 0.0, build_g_path(sc, g, 1, p), sc, g, p));
            }
        }
        return forward_error(batch, phi, 2.0);
    };
    const double e1 = err(0.5), e2 = err(0.25), e3 = err(1.0);
    EXPECT_NEAR(e1 / e2, 4.0, 1e-12);
    EXPECT_NEAR(e3 / e1, 4.0, 1e-12);
    // oracle: eps^2 max over scenarios of mean sup B^2
    double best = 0;
    for (const auto& sc : fam) {
        double s = 0;
        for (std::uint64_t p = 0; p < 200; ++p) {
            const auto path = build_g_path(sc, g, 1, p);
            double m = 0;
            for (double bb : path.b) m = std::max(m, std::abs(bb));
            s += m * m;
        }
        best = std::max(best, s / 200);
    }
    EXPECT_NEAR(e3, best, 1e-12 * best);
}

TEST(ForwardError, RequiresPAtLeastTwo) {
    const auto g = make_time_grid(0, 1, 4);
    const auto phi = solve_limit_ode(flat_preset(), 0.0, g);
    std::vector<ForwardSolution> batch{{0.0, 0.1, 0, 0, std::vector<double>(5, 0.0)}};
    EXPECT_THROW(forward_error(batch, phi, 1.0), Error);
}
