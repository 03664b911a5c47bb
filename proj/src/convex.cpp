#include "gldp/convex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gldp/error.hpp"

namespace gldp {

ConvexPenalty ConvexPenalty::zero() {
    ConvexPenalty p;
    p.kind_ = Kind::zero;
    return p;
}

ConvexPenalty ConvexPenalty::indicator_interval(double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo <= 0.0 && 0.0 <= hi)) {
        fail_argument("indicator_interval requires lo <= 0 <= hi");
    }
    ConvexPenalty p;
    p.kind_ = Kind::indicator_interval;
    p.lo_ = lo;
    p.hi_ = hi;
    return p;
}

ConvexPenalty ConvexPenalty::abs_scaled(double kappa) {
    if (!std::isfinite(kappa) || kappa < 0.0) fail_argument("abs_scaled requires finite kappa >= 0");
    ConvexPenalty p;
    p.kind_ = Kind::abs_scaled;
    p.kappa_ = kappa;
    return p;
}

ConvexPenalty ConvexPenalty::quadratic(double kappa) {
    if (!std::isfinite(kappa) || kappa < 0.0) fail_argument("quadratic requires finite kappa >= 0");
    ConvexPenalty p;
    p.kind_ = Kind::quadratic;
    p.kappa_ = kappa;
    return p;
}

ConvexPenalty ConvexPenalty::generic(std::function<double(double)> eval, double dom_lo, double dom_hi,
                                     double subgrad_bound, std::string label) {
    if (!eval) fail_argument("generic penalty needs an evaluation function");
    if (std::isnan(dom_lo) || std::isnan(dom_hi) || !(dom_lo <= dom_hi)) {
        fail_argument("generic penalty: empty effective domain");
    }
    ConvexPenalty p;
    p.kind_ = Kind::generic;
    p.lo_ = dom_lo;
    p.hi_ = dom_hi;
    p.subgrad_bound_ = std::isfinite(subgrad_bound) && subgrad_bound > 0.0 ? subgrad_bound : 1.0;
    p.user_eval_ = std::move(eval);
    p.label_ = std::move(label);
    return p;
}

std::string ConvexPenalty::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::zero: os << "zero"; break;
        case Kind::indicator_interval: os << "indicator_interval(" << lo_ << "," << hi_ << ")"; break;
        case Kind::abs_scaled: os << "abs_scaled(" << kappa_ << ")"; break;
        case Kind::quadratic: os << "quadratic(" << kappa_ << ")"; break;
        case Kind::generic: os << label_; break;
    }
    return os.str();
}

double ConvexPenalty::eval(double y) const {
    if (!in_domain(y)) return inf;
    switch (kind_) {
        case Kind::zero:
        case Kind::indicator_interval: return 0.0;
        case Kind::abs_scaled: return kappa_ * std::abs(y);
        case Kind::quadratic: return 0.5 * kappa_ * y * y;
        case Kind::generic: {
            const double v = user_eval_(y);
            return std::isnan(v) ? inf : v;
        }
    }
    return inf;
}

double ConvexPenalty::project_domain(double y) const noexcept { return std::clamp(y, lo_, hi_); }

double ConvexPenalty::prox(double lambda, double y) const {
    if (!(lambda > 0.0)) fail_argument("prox requires lambda > 0");
    switch (kind_) {
        case Kind::zero: return y;
        case Kind::indicator_interval: return std::clamp(y, lo_, hi_);
        case Kind::abs_scaled: {
            const double thr = lambda * kappa_;
            if (y > thr) return y - thr;
            if (y < -thr) return y + thr;
            return 0.0;
        }
        case Kind::quadratic: return y / (1.0 + lambda * kappa_);
        case Kind::generic: return generic_prox(lambda, y);
    }
    return y;
}

double ConvexPenalty::yosida(double lambda, double y) const {
    // Closed forms keep the selection exact (e.g. exactly kappa off the kink),
    // so monotonicity of the graph survives rounding.
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::abs_scaled: {
            if (!(lambda > 0.0)) fail_argument("prox requires lambda > 0");
            const double thr = lambda * kappa_;
            if (y > thr) return kappa_;
            if (y < -thr) return -kappa_;
            return y / lambda;
        }
        case Kind::quadratic: return kappa_ * prox(lambda, y);
        default: return (y - prox(lambda, y)) / lambda;
    }
}

double ConvexPenalty::generic_prox(double lambda, double y) const {
    auto objective = [&](double v) {
        const double pv = eval(v);
        return std::isfinite(pv) ? pv + (v - y) * (v - y) / (2.0 * lambda) : inf;
    };
    // A subgradient bound s confines the minimizer to [y - lambda s, y + lambda s];
    // s is doubled until the minimizer sits strictly inside the bracket or
    // against a domain endpoint.
    double s = subgrad_bound_;
    for (int expand = 0; expand < 64; ++expand, s *= 2.0) {
        double a = std::max(lo_, y - lambda * s);
        double b = std::min(hi_, y + lambda * s);
        if (a > b) {
            // bracket misses the domain; the minimizer is at the nearest endpoint
            // only if the bracket is wide enough, keep expanding.
            continue;
        }
        const double a0 = a, b0 = b;
        constexpr double inv_phi = 0.6180339887498949;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = objective(c), fd = objective(d);
        while (b - a > 1e-12 * std::max(1.0, std::abs(y))) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = objective(d);
            }
        }
        const double v = 0.5 * (a + b);
        const bool at_left = v - a0 < 1e-9 * std::max(1.0, std::abs(y)) && a0 > lo_;
        const bool at_right = b0 - v < 1e-9 * std::max(1.0, std::abs(y)) && b0 < hi_;
        if (!std::isfinite(objective(v))) {
            if (std::isfinite(objective(a0)) || std::isfinite(objective(b0))) continue;
            fail_argument("generic penalty '" + label_ + "': empty effective domain near y");
        }
        if (!at_left && !at_right) return v;
    }
    fail_numerical("generic prox: could not bracket the minimizer of '" + label_ + "'");
}

double subgradient_residual(const ConvexPenalty& p, double y, double u, std::span<const double> probes) {
    if (probes.empty()) fail_argument("subgradient_residual: probes must be non-empty");
    const double py = p.eval(y);
    if (!std::isfinite(py)) return ConvexPenalty::inf;
    double worst = 0.0;
    for (double v : probes) {
        const double pv = p.eval(v);
        if (!std::isfinite(pv)) continue;
        worst = std::max(worst, u * (v - y) + py - pv);
    }
    return worst;
}

std::vector<double> standard_probes(const ConvexPenalty& p, double y) {
    std::vector<double> probes{0.0, y};
    for (double off = 1e-6; off <= 100.0; off *= 10.0) {
        for (double m : {1.0, 3.0}) {
            probes.push_back(y + m * off);
            probes.push_back(y - m * off);
        }
    }
    if (std::isfinite(p.dom_lo())) probes.push_back(p.dom_lo());
    if (std::isfinite(p.dom_hi())) probes.push_back(p.dom_hi());
    return probes;
}

}  // namespace gldp
