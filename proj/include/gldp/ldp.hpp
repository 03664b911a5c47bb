#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gldp/coeffs.hpp"
#include "gldp/convex.hpp"
#include "gldp/fit.hpp"
#include "gldp/paths.hpp"
#include "gldp/ratefn.hpp"

namespace gldp {

/// Concrete events of path space. The monitored path U is X - x0
/// (forward_minus_x) or Y - psi_s (backward_y), so U starts at 0.
struct EventSpec {
    enum class Kind { exit_ball, terminal_above };
    enum class AppliedTo { forward_minus_x, backward_y };

    Kind kind = Kind::exit_ball;
    double param = 1.0;  // radius for exit_ball (> 0), level for terminal_above
    AppliedTo applied_to = AppliedTo::forward_minus_x;

    /// Event membership of a monitored path.
    bool contains(std::span<const double> u_path) const;
    void validate() const;
};

struct LdpPoint {
    double eps = 0.0;
    double capacity = 0.0;
    double eps_log_capacity = 0.0;  // -inf when capacity == 0
    std::size_t n_hits = 0;         // hits under the maximizing scenario
    std::size_t n_paths = 0;
    int argmax_scenario_id = 0;
};

struct LdpOptions {
    unsigned workers = 0;
    std::uint64_t seed = 1;
};

/// eps * log C^(U^eps in event) along an eps ladder (>= 3 entries,
/// n_paths >= 1000). eps is the speed of the principle: each run simulates
/// the forward system with noise amplitude sqrt(eps), so the driving
/// Gaussian tails are exp(-./eps).
std::vector<LdpPoint> empirical_ldp_curve(const EventSpec& spec, const CoefficientSet& c,
                                          const ConvexPenalty& penalty, const VolBounds& bounds,
                                          double x0, std::span<const double> eps_ladder,
                                          const ScenarioFamily& family, std::size_t n_paths,
                                          const TimeGrid& grid, const LdpOptions& options = {});

/// Rate function on monitored paths plus the zero-rate (limit) monitored path.
struct RateHandle {
    std::function<double(std::span<const double>)> rate;
    std::vector<double> lln_path;
    TimeGrid grid;
};

/// Lambda on phi_tilde = U; failures of the inversion count as +inf.
RateHandle forward_rate_handle(const CoefficientSet& c, const VolBounds& bounds, double x0,
                               const TimeGrid& grid, const RateOptions& options = {});

/// Lambda' on psi = psi_s + U through the field u0.
RateHandle backward_rate_handle(const CoefficientSet& c, const ConvexPenalty& penalty,
                                const VolBounds& bounds, double x0, const VIGrid& u0,
                                const TimeGrid& grid, const RateOptions& options = {});

/// Minimum of the rate over a parametrized family of candidate paths in the
/// event: an upper bound for the infimum that can only tighten as
/// candidate_family_size grows (candidate exit times are nested under doubling).
///  - exit_ball(delta): for each exit time tau, straight lines to +/-delta and
///    the limit path bent linearly onto +/-delta, then held or continued
///    parallel to the limit path.
///  - terminal_above(c): the straight line to c at T, the limit path bent
///    linearly onto c, and limit-then-dash paths leaving the limit at tau.
/// Returns 0 when the limit path itself lies in the event.
double theoretical_rate_inf(const EventSpec& spec, const RateHandle& handle, int candidate_family_size);

}  // namespace gldp
