#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "gldp/error.hpp"
#include "gldp/forward.hpp"
#include "gldp/limitbw.hpp"
#include "gldp/ratefn.hpp"

using namespace gldp;

namespace {

const VolBounds kBounds{1, 4};

CoefficientSet tanh_no_h() {
    auto c = tanh_drift_preset();
    c.h = [](double) { return 0.0; };
    return c;
}

CoefficientSet linear_decay() {
    auto c = flat_preset();
    c.f = [](double, double, double y, double) { return -y; };
    return c;
}

ControlPair constant_controls(int n, double p, double v) {
    return {std::vector<double>(n, p), std::vector<double>(n, v)};
}

}  // namespace

TEST(ActionJ, ConstantControls) {
    const auto g = make_time_grid(0, 2, 50);
    EXPECT_NEAR(action_J(constant_controls(50, 3.0, 2.0), g), 0.5 * 9.0 / 2.0 * 2.0, 1e-12);
}

TEST(ActionJ, OutOfBoxIsInfinite) {
    const auto g = make_time_grid(0, 1, 10);
    auto ctrl = constant_controls(10, 1.0, 2.0);
    EXPECT_TRUE(std::isfinite(action_J(ctrl, g, kBounds)));
    ctrl.eta_dot[3] = 4.5;
    EXPECT_TRUE(std::isinf(action_J(ctrl, g, kBounds)));
    ctrl.eta_dot[3] = 0.0;
    EXPECT_THROW(action_J(ctrl, g), Error);
    EXPECT_THROW(action_J(constant_controls(9, 1.0, 2.0), g), Error);
}

TEST(ControlledOde, FlatIsStraightLine) {
    const auto c = flat_preset();
    const auto g = make_time_grid(0, 1, 100);
    for (auto scheme : {OdeScheme::rk4, OdeScheme::implicit_midpoint}) {
        const auto path = controlled_ode(c, 0.3, constant_controls(100, 0.7, 2.0), g, scheme);
        for (int k = 0; k <= 100; ++k) EXPECT_NEAR(path[k], 0.3 + 0.7 * g.node(k), 1e-12);
    }
}

TEST(ControlledOde, LinearDriftClosedForm) {
    auto c = flat_preset();
    c.b = [](double x) { return -x; };
    c.h = [](double) { return 0.5; };
    // x' = -x + 1 + 0.5 * 2 = -x + 2
    const auto g = make_time_grid(0, 1, 200);
    const auto path = controlled_ode(c, 0.0, constant_controls(200, 1.0, 2.0), g, OdeScheme::rk4);
    for (int k = 0; k <= 200; ++k) EXPECT_NEAR(path[k], 2.0 * (1.0 - std::exp(-g.node(k))), 1e-9);
}

TEST(ControlledOde, Rk4RefinementConverges) {
    const auto c = tanh_drift_preset();
    const auto coarse = make_time_grid(0, 1, 400);
    const auto fine = make_time_grid(0, 1, 800);
    const auto a = controlled_ode(c, 0.5, constant_controls(400, 0.4, 1.5), coarse);
    const auto b = controlled_ode(c, 0.5, constant_controls(800, 0.4, 1.5), fine);
    EXPECT_LE(std::abs(a.back() - b.back()), 1e-8);
}

TEST(ControlledOde, BOnlyDropsControls) {
    const auto c = tanh_drift_preset();
    const auto g = make_time_grid(0, 1, 100);
    RateOptions opt;
    opt.psi_hat_b_only = true;
    const auto a = controlled_ode(c, 0.5, constant_controls(100, 5.0, 3.0), g, OdeScheme::rk4, opt);
    const auto b = controlled_ode(c, 0.5, constant_controls(100, 0.0, 3.0), g, OdeScheme::rk4, opt);
    EXPECT_EQ(a, b);
}

TEST(PointwiseEtaMin, MatchesScan) {
    for (double a : {-3.0, -0.5, 0.0, 0.7, 2.5, 9.0}) {
        for (double h : {-1.0, 0.0, 0.3, 2.0}) {
            const auto em = pointwise_eta_min(a, h, 1.3, kBounds);
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= 30000; ++i) {
                const double v = 1.0 + 3.0 * i / 30000.0;
                best = std::min(best, (a - h * v) * (a - h * v) / (1.69 * v));
            }
            EXPECT_NEAR(em.cost, best, 1e-7) << "a=" << a << " h=" << h;
            EXPECT_GE(em.v_star, 1.0);
            EXPECT_LE(em.v_star, 4.0);
        }
    }
    EXPECT_EQ(pointwise_eta_min(1.0, 0.0, 1.0, kBounds).v_star, 4.0);
}

TEST(LambdaRate, ZeroOnLimitPath) {
    const auto c = tanh_no_h();
    const auto g = make_time_grid(0, 1, 1000);
    const auto phi = solve_limit_ode(c, 0.5, g);
    std::vector<double> target(phi.phi.size());
    for (std::size_t k = 0; k < target.size(); ++k) target[k] = phi.phi[k] - 0.5;
    const auto r = lambda_rate(c, kBounds, 0.5, target, g);
    EXPECT_FALSE(r.infinite);
    EXPECT_LE(r.value, 1e-10);
}

TEST(LambdaRate, FlatStraightLine) {
    const auto c = flat_preset();
    const auto g = make_time_grid(0, 1, 100);
    std::vector<double> target(101);
    for (int k = 0; k <= 100; ++k) target[k] = 0.8 * g.node(k);
    const auto r = lambda_rate(c, kBounds, 0.0, target, g);
    EXPECT_NEAR(r.value, 0.64 / (2 * 4.0), 1e-12);
    for (double v : r.optimal_control.eta_dot) EXPECT_EQ(v, 4.0);
}

TEST(LambdaRate, ClassicalMatchesQuadrature) {
    // sigma_lo = sigma_hi reduces the rate to 1/2 int ((phi' - b) / sigma)^2 dt.
    const VolBounds classical{1, 1};
    const auto c = tanh_no_h();
    const auto g = make_time_grid(0, 1, 4000);
    std::vector<double> target(4001);
    for (int k = 0; k <= 4000; ++k) target[k] = 0.3 * std::sin(3.0 * g.node(k));
    const auto r = lambda_rate(c, classical, 0.2, target, g);
    double quad = 0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
        const double t = (i + 0.5) / m;
        const double x = 0.2 + 0.3 * std::sin(3.0 * t);
        const double d = 0.9 * std::cos(3.0 * t) - c.b(x);
        quad += d * d / (c.sigma(x) * c.sigma(x)) / m;
    }
    EXPECT_NEAR(r.value, 0.5 * quad, 1e-5);
}

TEST(LambdaRate, ReplayReproducesTarget) {
    const auto c = tanh_drift_preset();
    const auto g = make_time_grid(0, 1, 500);
    std::vector<double> target(501);
    for (int k = 0; k <= 500; ++k) target[k] = 0.4 * g.node(k) * g.node(k) - 0.2 * g.node(k);
    const auto r = lambda_rate(c, kBounds, 0.5, target, g);
    const auto replay = controlled_ode(c, 0.5, r.optimal_control, g, OdeScheme::implicit_midpoint);
    for (int k = 0; k <= 500; ++k) EXPECT_NEAR(replay[k], 0.5 + target[k], 1e-6);
    EXPECT_NEAR(action_J(r.optimal_control, g, kBounds), r.value, 1e-12);
}

TEST(LambdaRate, InputChecks) {
    const auto c = flat_preset();
    const auto g = make_time_grid(0, 1, 10);
    EXPECT_THROW(lambda_rate(c, kBounds, 0.0, std::vector<double>(10, 0.0), g), Error);
    std::vector<double> t(11, 0.0);
    t[0] = 0.1;
    EXPECT_THROW(lambda_rate(c, kBounds, 0.0, t, g), Error);
    t[0] = 0.0;
    t[4] = std::nan("");
    EXPECT_THROW(lambda_rate(c, kBounds, 0.0, t, g), Error);
}

TEST(LambdaRate, BOnlySwitch) {
    const auto c = tanh_drift_preset();
    const auto g = make_time_grid(0, 1, 200);
    RateOptions opt;
    opt.psi_hat_b_only = true;
    const auto path = controlled_ode(c, 0.5, constant_controls(200, 0.0, 4.0), g, OdeScheme::implicit_midpoint, opt);
    std::vector<double> target(201);
    for (int k = 0; k <= 200; ++k) target[k] = path[k] - 0.5;
    EXPECT_EQ(lambda_rate(c, kBounds, 0.5, target, g, opt).value, 0.0);
    target[100] += 0.01;
    EXPECT_TRUE(lambda_rate(c, kBounds, 0.5, target, g, opt).infinite);
}

TEST(LambdaPrime, LinearFieldRecoversForwardRate) {
    const auto c = linear_decay();
    const auto g = make_time_grid(0, 1, 400);
    std::vector<double> xs;
    for (int i = 0; i <= 40; ++i) xs.push_back(-2.0 + 0.1 * i);
    const auto u0 = limit_field_u0(c, ConvexPenalty::zero(), kBounds, xs, g);
    std::vector<double> phi_tilde(401);
    for (int k = 0; k <= 400; ++k) phi_tilde[k] = 0.5 * std::sin(2.0 * g.node(k));
    const auto psi = eval_F(u0, 0.3, phi_tilde);
    const auto r = lambda_prime(c, kBounds, 0.3, psi, u0, g);
    const auto direct = lambda_rate(c, kBounds, 0.3, phi_tilde, g);
    EXPECT_FALSE(r.infinite);
    EXPECT_NEAR(r.value, direct.value, 1e-9);
}

TEST(LambdaPrime, OutOfRangeIsInfinite) {
    const auto c = linear_decay();
    const auto g = make_time_grid(0, 1, 100);
    std::vector<double> xs{-1.0, -0.5, 0.0, 0.5, 1.0};
    const auto u0 = limit_field_u0(c, ConvexPenalty::zero(), kBounds, xs, g);
    std::vector<double> psi(101, 0.0);
    psi.back() = 5.0;
    EXPECT_TRUE(lambda_prime(c, kBounds, 0.0, psi, u0, g).infinite);
    std::fill(psi.begin(), psi.end(), 0.2);  // preimage starts away from x0 = 0
    EXPECT_TRUE(lambda_prime(c, kBounds, 0.0, psi, u0, g).infinite);
}

TEST(LambdaPrime, NonMonotoneRowThrows) {
    auto c = flat_preset();
    c.Phi = [](double x) { return x * x; };
    const auto g = make_time_grid(0, 1, 20);
    std::vector<double> xs{-1.0, -0.5, 0.0, 0.5, 1.0};
    const auto u0 = limit_field_u0(c, ConvexPenalty::zero(), kBounds, xs, g);
    std::vector<double> psi(21, 0.0);
    try {
        lambda_prime(c, kBounds, 0.0, psi, u0, g);
        FAIL() << "expected a numerical error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
    }
}

TEST(RateResultJson, FiniteAndInfinite) {
    const auto g = make_time_grid(0, 1, 4);
    std::vector<double> target{0, 0.1, 0.2, 0.3, 0.4};
    const auto r = lambda_rate(flat_preset(), kBounds, 0.0, target, g);
    const auto doc = nlohmann::json::parse(rate_result_json(r));
    EXPECT_NEAR(doc["value"].get<double>(), r.value, 1e-15);
    EXPECT_FALSE(doc["infinite"].get<bool>());
    EXPECT_EQ(doc["phi_dot"].size(), 4u);
    EXPECT_EQ(doc["eta_dot"].size(), 4u);
    EXPECT_EQ(doc["target"].size(), 5u);
    const auto inf = nlohmann::json::parse(rate_result_json(RateResult::infinity(target)));
    EXPECT_TRUE(inf["value"].is_null());
    EXPECT_TRUE(inf["infinite"].get<bool>());
}
