#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gldp/coeffs.hpp"
#include "gldp/convex.hpp"
#include "gldp/fit.hpp"
#include "gldp/forward.hpp"
#include "gldp/limitbw.hpp"
#include "gldp/paths.hpp"

namespace gldp {

/// Row-major (time x space) matrix.
class Field2D {
public:
    Field2D() = default;
    Field2D(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    bool operator==(const Field2D&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct SpatialWindow {
    double x_lo = -1.0;
    double x_hi = 1.0;
    int nx = 9;
};

/// Field u(t_k, x_i) on a uniform space grid, plus the prox input
/// (predictor) of every step. Rows run over time nodes t_0..t_N.
struct VIGrid {
    double eps = 0.0;
    std::vector<double> t_nodes;
    std::vector<double> x_nodes;
    double dx = 0.0;
    Field2D u;
    Field2D predictor;  // row N holds the terminal values

    double x_lo() const noexcept { return x_nodes.front(); }
    double x_hi() const noexcept { return x_nodes.back(); }
    bool contains(double x) const noexcept { return x >= x_lo() && x <= x_hi(); }

    /// Linear interpolation of u in space at time row k.
    double value(std::size_t k, double x) const { return interpolate(u, k, x); }
    /// Linear interpolation of the central-difference slope of u.
    double slope(std::size_t k, double x) const;
    double interpolate(const Field2D& f, std::size_t k, double x) const;
};

struct VIOptions {
    bool apply_prox = true;  // false gives the same scheme with the prox step removed
};

/// Largest time step for which the explicit scheme is monotone on the window:
/// 1 / max_i (sigma_hi_sq eps^2 sigma(x_i)^2 / dx^2 + |b(x_i)| / dx).
double max_monotone_dt(const CoefficientSet& c, const VolBounds& bounds, double eps,
                       const SpatialWindow& window);

/// Window [x0 - R, x0 + R] with
/// R = ceil(sup|b| T + 5 eps sigma_hi sup|sigma| sqrt(T) + eps sigma_hi_sq sup|h| T), R >= 1,
/// and the finest nx (capped at nx_max) satisfying the monotonicity bound
/// with a 0.9 safety factor.
SpatialWindow default_window(const CoefficientSet& c, const VolBounds& bounds, double x0,
                             double eps, const TimeGrid& grid, int nx_max = 4001);

/// Finest nx on [x_lo, x_hi] with dt <= 0.9 * max_monotone_dt, within [9, nx_max].
int choose_nx(const CoefficientSet& c, const VolBounds& bounds, double eps, double x_lo,
              double x_hi, double dt, int nx_max = 4001);

/// Backward explicit-in-space, prox-in-Pi scheme for the variational
/// inequality. At node i and step k (values of row k+1 on the right):
///   H    = Dxx eps^2 sigma^2 + 2 Dx eps h + 2 g(t_k, x, u, eps sigma Dx)
///   pred = u + dt [G(H) + b Dx_up + f(t_k, x, u, eps sigma Dx)]
///   u_k  = prox(Pi, dt, pred)
/// Dx is the central difference, Dx_up the upwind difference along b, Dxx
/// the second difference. Edge nodes see a reflecting ghost node
/// (u_{-1} = u_1), which keeps the scheme monotone. u(T, .) = Phi projected
/// onto Dom(Pi).
VIGrid solve_vi(const CoefficientSet& c, const ConvexPenalty& penalty, const VolBounds& bounds,
                double eps, const SpatialWindow& window, const TimeGrid& grid,
                const VIOptions& options = {});

/// u0(t_k, x_i) = psi at t_k of the limit system started from (t_k, x_i).
VIGrid limit_field_u0(const CoefficientSet& c, const ConvexPenalty& penalty,
                      const VolBounds& bounds, std::span<const double> x_nodes,
                      const TimeGrid& grid, unsigned workers = 1);

/// t -> u(t, x0 + phi_tilde_t) by spatial interpolation; throws on any
/// query outside the window.
std::vector<double> eval_F(const VIGrid& field, double x0, std::span<const double> phi_tilde);

struct BackwardSolution {
    std::vector<double> y;      // nodes
    std::vector<double> z;      // nodes
    std::vector<double> k;      // nodes, k[0] = 0
    std::vector<double> u_sel;  // cells
};

/// Reads (Y, Z, U) off the field along a forward path and defines K as the
/// residual of the discrete backward identity
///   K_{j+1} - K_j = Y_{j+1} - Y_j + f_j dt - U_j dt + g_j d<B>_j - Z_j dB_j.
/// Y_N = Phi(X_N) (projected onto Dom(Pi)).
BackwardSolution reconstruct_backward(const VIGrid& field, const ForwardSolution& fx,
                                      const CoefficientSet& c, const ConvexPenalty& penalty,
                                      const GPath& path, const TimeGrid& grid);

struct ConvergenceRow {
    double eps = 0.0;
    double e_X = 0.0;  // E^[sup |X - phi|^2]
    double e_Y = 0.0;  // E^[sup |Y - psi|^2]
    double e_Z = 0.0;  // E^[int |Z|^2 dr]
    double e_K = 0.0;  // E^[sup |K - M|^2]
    int argmax_X = 0;
    int argmax_Y = 0;
    int argmax_Z = 0;
    int argmax_K = 0;
    int nx = 0;
    double x_lo = 0.0;
    double x_hi = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    SlopeFit slope_X;
    SlopeFit slope_Y;
    SlopeFit slope_Z;
    SlopeFit slope_K;
    std::size_t family_size = 0;
    std::size_t n_paths = 0;
};

struct ConvergenceOptions {
    unsigned workers = 0;  // 0: all cores
    std::uint64_t seed = 1;
    std::optional<SpatialWindow> window;  // default_window per eps when empty
};

/// Runs the forward and backward systems over the scenario family for every
/// eps of a strictly decreasing ladder (>= 3 entries) and fits log-log
/// slopes of the four error functionals against eps.
ConvergenceReport convergence_experiment(const CoefficientSet& c, const ConvexPenalty& penalty,
                                         const VolBounds& bounds, double x0,
                                         std::span<const double> eps_ladder,
                                         const ScenarioFamily& family, std::size_t n_paths,
                                         const TimeGrid& grid, const ConvergenceOptions& options = {});

/// Same experiment for several penalties over shared forward paths; one
/// report per penalty, each identical to the single-penalty run.
std::vector<ConvergenceReport> convergence_experiment(const CoefficientSet& c,
                                                      std::span<const ConvexPenalty> penalties,
                                                      const VolBounds& bounds, double x0,
                                                      std::span<const double> eps_ladder,
                                                      const ScenarioFamily& family, std::size_t n_paths,
                                                      const TimeGrid& grid,
                                                      const ConvergenceOptions& options = {});

/// CSV matrix: header row "t,x_0,...", then one row per time node.
void write_field_csv(const VIGrid& field, std::ostream& out);

}  // namespace gldp
