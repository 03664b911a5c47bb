#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gldp {

/// Proper l.s.c. convex penalty on the real line with Pi(y) >= Pi(0) = 0.
///
/// The subdifferential is never stored set-valued; consumers go through the
/// resolvent prox(lambda, .) = (I + lambda dPi)^{-1} and the Yosida
/// approximation (y - prox(lambda, y)) / lambda, both single-valued.
class ConvexPenalty {
public:
    enum class Kind { zero, indicator_interval, abs_scaled, quadratic, generic };

    static constexpr double inf = std::numeric_limits<double>::infinity();

    /// Pi = 0.
    static ConvexPenalty zero();
    /// Pi = 0 on [lo, hi], +inf outside. Requires lo <= 0 <= hi; either end may be infinite.
    static ConvexPenalty indicator_interval(double lo, double hi);
    /// Pi(y) = kappa |y|, kappa >= 0.
    static ConvexPenalty abs_scaled(double kappa);
    /// Pi(y) = kappa y^2 / 2, kappa >= 0.
    static ConvexPenalty quadratic(double kappa);
    /// User-supplied convex function, finite on [dom_lo, dom_hi] and +inf
    /// outside. subgrad_bound seeds the prox bracket and is doubled as needed.
    static ConvexPenalty generic(std::function<double(double)> eval, double dom_lo, double dom_hi,
                                 double subgrad_bound = 1.0, std::string label = "generic");

    Kind kind() const noexcept { return kind_; }
    double dom_lo() const noexcept { return lo_; }
    double dom_hi() const noexcept { return hi_; }
    double param() const noexcept { return kappa_; }
    std::string describe() const;

    /// Pi(y); +inf outside the domain.
    double eval(double y) const;

    bool in_domain(double y) const noexcept { return y >= lo_ && y <= hi_; }

    /// Nearest point of the closed domain.
    double project_domain(double y) const noexcept;

    /// argmin_v { Pi(v) + (v - y)^2 / (2 lambda) }; closed forms for built-in
    /// kinds, golden-section search down to a 1e-12 bracket for generic ones.
    /// Value comparisons locate a smooth minimum only to about
    /// sqrt(machine eps * |objective| * lambda); kinks are found to the bracket width.
    double prox(double lambda, double y) const;

    /// (y - prox(lambda, y)) / lambda.
    double yosida(double lambda, double y) const;

private:
    ConvexPenalty() = default;
    double generic_prox(double lambda, double y) const;

    Kind kind_ = Kind::zero;
    double lo_ = -inf;
    double hi_ = inf;
    double kappa_ = 0.0;
    double subgrad_bound_ = 1.0;
    std::function<double(double)> user_eval_;
    std::string label_;
};

inline double prox(const ConvexPenalty& p, double lambda, double y) { return p.prox(lambda, y); }
inline double yosida(const ConvexPenalty& p, double lambda, double y) { return p.yosida(lambda, y); }

/// max over probes v of (u (v - y) + Pi(y) - Pi(v))^+. Zero iff (y, u)
/// passes the Gr(dPi) inequality on every probe; +inf if y is outside Dom(Pi).
double subgradient_residual(const ConvexPenalty& p, double y, double u, std::span<const double> probes);

/// Probe points around y: y +/- a geometric ladder of offsets from 1e-6 to
/// 100, plus 0 and any finite domain endpoints.
std::vector<double> standard_probes(const ConvexPenalty& p, double y);

}  // namespace gldp
