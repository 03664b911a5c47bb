#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gldp/error.hpp"
#include "gldp/gcore.hpp"

using namespace gldp;

namespace {

// 1/2 max over v in [lo, hi] of v a, by scanning v.
double g_scan(double a, const VolBounds& b) {
    double best = -INFINITY;
    for (int i = 0; i <= 1000; ++i) {
        const double v = b.sigma_lo_sq + (b.sigma_hi_sq - b.sigma_lo_sq) * i / 1000.0;
        best = std::max(best, 0.5 * v * a);
    }
    return best;
}

double plain_mean(const std::vector<double>& v) {
    long double s = 0;
    for (double x : v) s += x;
    return static_cast<double>(s / v.size());
}

ScenarioSamples random_samples(std::mt19937_64& rng, int n_scen, int n) {
    std::normal_distribution<double> nd;
    ScenarioSamples out;
    for (int s = 0; s < n_scen; ++s) {
        ScenarioSample smp{s, {}};
        const double shift = 0.3 * s;
        for (int i = 0; i < n; ++i) smp.values.push_back(shift + nd(rng));
        out.push_back(std::move(smp));
    }
    return out;
}

}  // namespace

TEST(GFunction, KnownValues) {
    const VolBounds b{1.0, 4.0};
    EXPECT_EQ(g_function(0.0, b), 0.0);
    EXPECT_EQ(g_function(1.0, b), 2.0);
    EXPECT_EQ(g_function(-1.0, b), -0.5);
    EXPECT_EQ(g_function(3.0, VolBounds{2.0, 2.0}), 3.0);
}

TEST(GFunction, MatchesScanOfLinearFamily) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ud(-5, 5);
    const VolBounds b{0.5, 2.5};
    for (int i = 0; i < 200; ++i) {
        const double a = ud(rng);
        EXPECT_NEAR(g_function(a, b), g_scan(a, b), 1e-12);
    }
}

TEST(GFunction, SublinearAndHomogeneous) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ud(-3, 3);
    const VolBounds b{1.0, 4.0};
    for (int i = 0; i < 1000; ++i) {
        const double x = ud(rng), y = ud(rng), lam = std::abs(ud(rng));
        EXPECT_LE(g_function(x + y, b), g_function(x, b) + g_function(y, b) + 1e-12);
        EXPECT_NEAR(g_function(lam * x, b), lam * g_function(x, b), 1e-12);
    }
}

TEST(VolBounds, RejectsInvalidWithFieldName) {
    try {
        VolBounds::make(4.0, 1.0);
        FAIL() << "no throw";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
        EXPECT_NE(std::string(e.what()).find("sigma_lo_sq"), std::string::npos);
    }
    EXPECT_THROW(VolBounds::make(0.0, 1.0), Error);
    EXPECT_THROW(VolBounds::make(-1.0, 1.0), Error);
    EXPECT_NO_THROW(VolBounds::make(1.0, 1.0));
    EXPECT_TRUE(VolBounds::make(1.0, 1.0).classical());
}

TEST(Sublinear, MaxOfScenarioMeans) {
    ScenarioSamples s{{0, {1.0, 2.0, 3.0}}, {1, {5.0, 5.0}}, {2, {-1.0, 10.0}}};
    EXPECT_DOUBLE_EQ(sublinear_expectation(s), 5.0);
    const auto est = sublinear_estimate(s);
    EXPECT_EQ(est.argmax_id, 1);
    EXPECT_EQ(est.family_size, 3u);
    ASSERT_EQ(est.means.size(), 3u);
    EXPECT_DOUBLE_EQ(est.means[2], 4.5);
}

TEST(Sublinear, StandardErrorOracle) {
    std::mt19937_64 rng(3);
    auto s = random_samples(rng, 3, 500);
    const auto est = sublinear_estimate(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double m = plain_mean(s[k].values);
        long double ss = 0;
        for (double x : s[k].values) ss += (x - m) * (x - m);
        const double sd = std::sqrt(static_cast<double>(ss / (s[k].values.size() - 1)));
        EXPECT_NEAR(est.means[k], m, 1e-12);
        EXPECT_NEAR(est.standard_errors[k], sd / std::sqrt(500.0), 1e-12);
    }
}

TEST(Sublinear, Axioms) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto X = random_samples(rng, 4, 64);
        auto Y = random_samples(rng, 4, 64);
        ScenarioSamples sum = X, neg = X, scaled = X, shifted = X, bigger = X;
        const double lam = 0.1 + trial * 0.2, c = -1.0 + trial * 0.05;
        for (std::size_t s = 0; s < X.size(); ++s) {
            for (std::size_t i = 0; i < X[s].values.size(); ++i) {
                sum[s].values[i] += Y[s].values[i];
                neg[s].values[i] = -X[s].values[i];
                scaled[s].values[i] *= lam;
                shifted[s].values[i] += c;
                bigger[s].values[i] += std::abs(Y[s].values[i]);
            }
        }
        const double eX = sublinear_expectation(X), eY = sublinear_expectation(Y);
        EXPECT_LE(sublinear_expectation(sum), eX + eY + 1e-12);
        EXPECT_NEAR(sublinear_expectation(scaled), lam * eX, 1e-12 * (1 + lam));
        EXPECT_NEAR(sublinear_expectation(shifted), eX + c, 1e-12);
        EXPECT_GE(sublinear_expectation(bigger), eX);
        EXPECT_GE(sublinear_expectation(neg), -eX - 1e-12);
    }
    ScenarioSamples constant{{0, {2.5, 2.5}}, {4, {2.5}}};
    EXPECT_DOUBLE_EQ(sublinear_expectation(constant), 2.5);
}

TEST(Sublinear, ClassicalCollapse) {
    std::mt19937_64 rng(9);
    auto s = random_samples(rng, 1, 1000);
    EXPECT_NEAR(sublinear_expectation(s), plain_mean(s[0].values), 1e-13);
}

TEST(Sublinear, Errors) {
    EXPECT_THROW(sublinear_expectation({}), Error);
    EXPECT_THROW(sublinear_expectation({{0, {1.0}}, {0, {2.0}}}), Error);
    EXPECT_THROW(sublinear_expectation({{0, {}}}), Error);
}

TEST(Capacity, IndicatorsOnly) {
    EXPECT_DOUBLE_EQ(capacity({{0, {0, 0, 1, 1}}, {1, {1, 0, 0, 0}}}), 0.5);
    EXPECT_THROW(capacity({{0, {0.5}}}), Error);
    EXPECT_DOUBLE_EQ(capacity({{0, {0, 0}}}), 0.0);
}
