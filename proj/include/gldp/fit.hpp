#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gldp {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least-squares line through (x, y). Needs >= 3 finite points.
SlopeFit fit_slope(std::span<const std::pair<double, double>> points);

/// fit_slope on (log x, log y). Needs >= 3 points with x, y > 0.
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace gldp
