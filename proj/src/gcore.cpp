#include "gldp/gcore.hpp"

#include <cmath>
#include <set>
#include <string>

#include "gldp/error.hpp"
#include "gldp/numeric.hpp"

namespace gldp {

VolBounds VolBounds::make(double sigma_lo_sq, double sigma_hi_sq) {
    if (!std::isfinite(sigma_lo_sq) || !(sigma_lo_sq > 0.0)) {
        fail_argument("sigma_lo_sq must be finite and > 0");
    }
    if (!std::isfinite(sigma_hi_sq)) fail_argument("sigma_hi_sq must be finite");
    if (sigma_lo_sq > sigma_hi_sq) {
        fail_argument("sigma_lo_sq must not exceed sigma_hi_sq");
    }
    return VolBounds{sigma_lo_sq, sigma_hi_sq};
}

namespace {

void check_samples(const ScenarioSamples& samples) {
    if (samples.empty()) fail_argument("no scenarios");
    std::set<int> ids;
    for (const auto& s : samples) {
        if (!ids.insert(s.id).second) {
            fail_argument("duplicate scenario id " + std::to_string(s.id));
        }
        if (s.values.empty()) {
            fail_argument("scenario " + std::to_string(s.id) + " has no samples");
        }
    }
}

}  // namespace

SublinearEstimate sublinear_estimate(const ScenarioSamples& samples) {
    check_samples(samples);
    SublinearEstimate est;
    est.family_size = samples.size();
    est.means.reserve(samples.size());
    est.standard_errors.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& vals = samples[i].values;
        const double mean = compensated_mean(vals);
        CompensatedSum sq;
        for (double v : vals) sq.add((v - mean) * (v - mean));
        const double n = static_cast<double>(vals.size());
        const double var = vals.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
        est.means.push_back(mean);
        est.standard_errors.push_back(std::sqrt(var / n));
        if (i == 0 || mean > est.value) {
            est.value = mean;
            est.argmax_id = samples[i].id;
        }
    }
    return est;
}

double sublinear_expectation(const ScenarioSamples& samples) {
    return sublinear_estimate(samples).value;
}

double capacity(const ScenarioSamples& indicators) {
    for (const auto& s : indicators) {
        for (double v : s.values) {
            if (v != 0.0 && v != 1.0) {
                fail_argument("capacity: scenario " + std::to_string(s.id) +
                              " has a non-indicator sample");
            }
        }
    }
    return sublinear_expectation(indicators);
}

}  // namespace gldp
