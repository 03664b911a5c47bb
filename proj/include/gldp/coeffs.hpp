#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gldp/gcore.hpp"

namespace gldp {

using ScalarFn = std::function<double(double)>;
using DriverFn = std::function<double(double t, double x, double y, double z)>;

/// Deterministic data of the forward-backward system. Callables must be
/// free of hidden mutable state; they are evaluated concurrently.
struct CoefficientSet {
    std::string name;
    ScalarFn b;      // forward drift
    ScalarFn h;      // d<B> coefficient of the forward equation
    ScalarFn sigma;  // dB coefficient of the forward equation
    ScalarFn Phi;    // terminal map
    DriverFn f;      // dt driver
    DriverFn g;      // d<B> driver
    double lipschitz_L = 1.0;
    double bound_L = 1.0;
    double sigma_min = 1.0;  // declared positive lower bound of sigma
};

struct ValidationReport {
    double max_abs_b = 0.0;
    double max_abs_h = 0.0;
    double max_abs_sigma = 0.0;
    double min_sigma = 0.0;
    double lip_b = 0.0;
    double lip_h = 0.0;
    double lip_sigma = 0.0;
    double lip_Phi = 0.0;
    double lip_f = 0.0;  // |f(p)-f(p')| / (|dx|+|dy|+|dz|)
    double lip_g = 0.0;
    std::vector<std::string> failures;

    bool passed() const noexcept { return failures.empty(); }
};

/// Probes boundedness of b, h, sigma, the sigma floor, and Lipschitz
/// quotients of all six functions on random points of [probe_lo, probe_hi]
/// (t drawn from [0, 1]). Declared constants are accepted up to (1 + margin).
ValidationReport validate_coefficients(const CoefficientSet& c, double probe_lo, double probe_hi,
                                       int n_probes, std::uint64_t seed, double margin = 0.05);

/// sup of |fn| over a uniform probe of [lo, hi].
double probe_sup_abs(const ScalarFn& fn, double lo, double hi, int n = 4001);

struct CoefficientBounds {
    double sup_b = 0.0;
    double sup_h = 0.0;
    double sup_sigma = 0.0;
};

/// Probe of sup|b|, sup|h|, sup|sigma| over [center - radius, center + radius].
CoefficientBounds probe_coefficient_bounds(const CoefficientSet& c, double center,
                                           double radius = 50.0);

/// b = h = 0, sigma = 1, Phi = id, f = g = 0.
CoefficientSet flat_preset();

/// b = tanh, h = 0.1 cos, sigma = 1 + 0.5 cos^2, Phi = arctan,
/// f = -y + sin x, g = 0.5 cos y.
CoefficientSet tanh_drift_preset();

struct Preset {
    CoefficientSet coeffs;
    std::optional<VolBounds> bounds;  // preset-imposed bounds, if any
};

/// "flat", "tanh-drift", or "classical" (tanh-drift data with sigma_lo_sq =
/// sigma_hi_sq = 1). Throws Error(invalid_argument) on an unknown name.
Preset find_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace gldp
