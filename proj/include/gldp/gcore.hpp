#pragma once

#include <cstddef>
#include <vector>

namespace gldp {

/// Volatility-uncertainty interval [sigma_lo_sq, sigma_hi_sq], variance per
/// unit time. Only the non-degenerate case 0 < lo <= hi is representable.
struct VolBounds {
    double sigma_lo_sq = 1.0;
    double sigma_hi_sq = 1.0;

    /// Validating constructor; throws Error(invalid_argument) naming the field.
    static VolBounds make(double sigma_lo_sq, double sigma_hi_sq);

    bool classical() const noexcept { return sigma_lo_sq == sigma_hi_sq; }
};

/// G(a) = (sigma_hi_sq * a^+ - sigma_lo_sq * a^-) / 2.
inline double g_function(double a, const VolBounds& bounds) noexcept {
    return a >= 0.0 ? 0.5 * bounds.sigma_hi_sq * a : 0.5 * bounds.sigma_lo_sq * a;
}

/// Samples of one random variable under one scenario of the family.
struct ScenarioSample {
    int id = 0;
    std::vector<double> values;
};

/// Finite proxy for the representing set of measures: one sample array per
/// scenario. Ids are unique, arrays non-empty.
using ScenarioSamples = std::vector<ScenarioSample>;

/// Sup-over-scenarios estimate with the bookkeeping that goes with it. The
/// family size travels with every estimate; no convergence in the family
/// size is claimed.
struct SublinearEstimate {
    double value = 0.0;
    int argmax_id = 0;
    std::size_t family_size = 0;
    std::vector<double> means;          // per scenario, input order
    std::vector<double> standard_errors;  // per scenario, input order
};

SublinearEstimate sublinear_estimate(const ScenarioSamples& samples);

/// max over scenarios of the compensated per-scenario sample mean.
double sublinear_expectation(const ScenarioSamples& samples);

/// Same reduction for {0,1} indicator samples; throws on any other value.
double capacity(const ScenarioSamples& indicators);

}  // namespace gldp
