#include "gldp/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gldp/error.hpp"
#include "gldp/rng.hpp"

namespace gldp {

namespace {

std::string fmt_fail(const std::string& what, double observed, double declared) {
    std::ostringstream os;
    os << what << ": observed " << observed << " exceeds declared " << declared;
    return os.str();
}

}  // namespace

double probe_sup_abs(const ScalarFn& fn, double lo, double hi, int n) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * i / std::max(1, n - 1);
        best = std::max(best, std::abs(fn(x)));
    }
    return best;
}

CoefficientBounds probe_coefficient_bounds(const CoefficientSet& c, double center, double radius) {
    const double lo = center - radius;
    const double hi = center + radius;
    return {probe_sup_abs(c.b, lo, hi), probe_sup_abs(c.h, lo, hi), probe_sup_abs(c.sigma, lo, hi)};
}

ValidationReport validate_coefficients(const CoefficientSet& c, double probe_lo, double probe_hi,
                                       int n_probes, std::uint64_t seed, double margin) {
    if (!(probe_lo < probe_hi)) fail_argument("validate_coefficients: probe_lo must be < probe_hi");
    if (n_probes < 1) fail_argument("validate_coefficients: n_probes must be >= 1");

    ValidationReport rep;
    rep.min_sigma = INFINITY;
    CounterStream rs(seed, StreamDomain::coefficient_probes, 0);
    auto draw = [&] { return probe_lo + (probe_hi - probe_lo) * rs.uniform(); };
    auto quotient = [](double df, double dx) { return dx > 0.0 ? std::abs(df) / dx : 0.0; };

    for (int i = 0; i < n_probes; ++i) {
        const double x = draw();
        const double xp = draw();
        rep.max_abs_b = std::max({rep.max_abs_b, std::abs(c.b(x)), std::abs(c.b(xp))});
        rep.max_abs_h = std::max({rep.max_abs_h, std::abs(c.h(x)), std::abs(c.h(xp))});
        rep.max_abs_sigma =
            std::max({rep.max_abs_sigma, std::abs(c.sigma(x)), std::abs(c.sigma(xp))});
        rep.min_sigma = std::min({rep.min_sigma, c.sigma(x), c.sigma(xp)});

        const double dx = std::abs(x - xp);
        rep.lip_b = std::max(rep.lip_b, quotient(c.b(x) - c.b(xp), dx));
        rep.lip_h = std::max(rep.lip_h, quotient(c.h(x) - c.h(xp), dx));
        rep.lip_sigma = std::max(rep.lip_sigma, quotient(c.sigma(x) - c.sigma(xp), dx));
        rep.lip_Phi = std::max(rep.lip_Phi, quotient(c.Phi(x) - c.Phi(xp), dx));

        const double t = rs.uniform();
        const double y = draw(), yp = draw(), z = draw(), zp = draw();
        const double d = dx + std::abs(y - yp) + std::abs(z - zp);
        rep.lip_f = std::max(rep.lip_f, quotient(c.f(t, x, y, z) - c.f(t, xp, yp, zp), d));
        rep.lip_g = std::max(rep.lip_g, quotient(c.g(t, x, y, z) - c.g(t, xp, yp, zp), d));
    }

    const double bound = c.bound_L * (1.0 + margin);
    const double lip = c.lipschitz_L * (1.0 + margin);
    if (rep.max_abs_b > bound) rep.failures.push_back(fmt_fail("sup|b|", rep.max_abs_b, c.bound_L));
    if (rep.max_abs_h > bound) rep.failures.push_back(fmt_fail("sup|h|", rep.max_abs_h, c.bound_L));
    if (rep.max_abs_sigma > bound) {
        rep.failures.push_back(fmt_fail("sup|sigma|", rep.max_abs_sigma, c.bound_L));
    }
    if (!(rep.min_sigma >= c.sigma_min) || !(c.sigma_min > 0.0)) {
        std::ostringstream os;
        os << "sigma floor: observed min " << rep.min_sigma << " below declared sigma_min "
           << c.sigma_min;
        rep.failures.push_back(os.str());
    }
    const std::pair<const char*, double> lips[] = {{"Lip(b)", rep.lip_b},     {"Lip(h)", rep.lip_h},
                                                   {"Lip(sigma)", rep.lip_sigma}, {"Lip(Phi)", rep.lip_Phi},
                                                   {"Lip(f)", rep.lip_f},     {"Lip(g)", rep.lip_g}};
    for (const auto& [name, value] : lips) {
        if (value > lip) rep.failures.push_back(fmt_fail(name, value, c.lipschitz_L));
    }
    return rep;
}

CoefficientSet flat_preset() {
    CoefficientSet c;
    c.name = "flat";
    c.b = [](double) { return 0.0; };
    c.h = [](double) { return 0.0; };
    c.sigma = [](double) { return 1.0; };
    c.Phi = [](double x) { return x; };
    c.f = [](double, double, double, double) { return 0.0; };
    c.g = [](double, double, double, double) { return 0.0; };
    c.lipschitz_L = 1.0;
    c.bound_L = 1.0;
    c.sigma_min = 1.0;
    return c;
}

CoefficientSet tanh_drift_preset() {
    CoefficientSet c;
    c.name = "tanh-drift";
    c.b = [](double x) { return std::tanh(x); };
    c.h = [](double x) { return 0.1 * std::cos(x); };
    c.sigma = [](double x) {
        const double cx = std::cos(x);
        return 1.0 + 0.5 * cx * cx;
    };
    c.Phi = [](double x) { return std::atan(x); };
    c.f = [](double, double x, double y, double) { return -y + std::sin(x); };
    c.g = [](double, double, double y, double) { return 0.5 * std::cos(y); };
    c.lipschitz_L = 2.0;
    c.bound_L = 2.0;
    c.sigma_min = 1.0;
    return c;
}

Preset find_preset(const std::string& name) {
    if (name == "flat") return {flat_preset(), std::nullopt};
    if (name == "tanh-drift") return {tanh_drift_preset(), std::nullopt};
    if (name == "classical") {
        auto c = tanh_drift_preset();
        c.name = "classical";
        return {std::move(c), VolBounds::make(1.0, 1.0)};
    }
    fail_argument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"flat", "tanh-drift", "classical"}; }

}  // namespace gldp
