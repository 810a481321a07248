#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "hjbport/market.hpp"
#include "hjbport/rbf.hpp"

namespace hjbport {

// Collocation grid: equispaced nodes x_i = i h_x from 0 up past x*, with
// extra_nodes points beyond the first node at or above x* to stabilize the
// derivative approximation near the right boundary. Time axis has M explicit
// Euler steps of length h_t = T/M; the RBF shape parameter is
// shape_factor * h_x.
struct GridSpec {
    double h_x = 0.5;
    int extra_nodes = 5;
    long time_steps = 0;
    double shape_factor = 0.5;

    double shape() const { return shape_factor * h_x; }
    void validate() const;
};

struct SurfaceRow {
    long step = 0;            // k, in [0, M]
    double time = 0.0;        // t_k = k h_t
    Eigen::VectorXd values;   // node values of the solved surface at t_k
    Eigen::VectorXd coeffs;   // RBF coefficients fitting those values
};

// Time-indexed family of RBF interpolants approximating the value function.
// Rows are stored at a caller-chosen stride (plus the first and last step);
// the spacing is chosen so every simulation rebalance date has its row.
class ValueSurface {
  public:
    ValueSurface(GridSpec grid, double horizon, double xstar,
                 std::shared_ptr<const RbfBasis> basis, std::vector<SurfaceRow> rows);

    const GridSpec& grid() const { return grid_; }
    double horizon() const { return horizon_; }
    double xstar() const { return xstar_; }
    const RbfBasis& basis() const { return *basis_; }
    const std::shared_ptr<const RbfBasis>& basis_ptr() const { return basis_; }
    const Eigen::VectorXd& nodes() const { return basis_->centers(); }

    // Index of the first node at or above x* (snap tolerance absorbs grid
    // rounding); node values from here on are pinned to zero.
    int zero_from() const { return zero_from_; }

    const std::vector<SurfaceRow>& rows() const { return rows_; }

    // Row with the largest stored t_k <= t (within tolerance); throws
    // InputError when t precedes the earliest stored row.
    const SurfaceRow& row_at_or_below(double t) const;

    // Exact-step lookup for simulation rebalance dates; throws ConfigError
    // when no stored row matches step k.
    const SurfaceRow& row_at_step(long k) const;

    Interpolant interpolant(const SurfaceRow& row) const;

  private:
    GridSpec grid_;
    double horizon_;
    double xstar_;
    int zero_from_;
    std::shared_ptr<const RbfBasis> basis_;
    std::vector<SurfaceRow> rows_;  // ascending step
};

struct SolveReport {
    double condition_estimate = 0.0;   // Gram condition of the shared basis
    bool condition_warning = false;    // estimate above 1e12
    long curvature_clamps = 0;         // nodes where d2 < 0 was clamped
    // Raw (unclamped) second-derivative range per stored row, same order as
    // ValueSurface::rows().
    std::vector<double> row_d2_min;
    std::vector<double> row_d2_max;
    // Boundary-stability diagnostic at t=0. The fitted curvature is sampled
    // at the midpoints between the last five interior nodes below x*: the
    // multiquadric's node-locked ringing mode (which alternates sign at the
    // collocation points themselves, even on clean convex data) vanishes
    // there, so a sign change across these samples is a genuine oscillation
    // of the solution, not a kernel artifact. The flag also trips when the
    // t=0 node values fail to decrease monotonically below x*, the companion
    // signature of an unstable boundary.
    bool boundary_oscillation = false;
    double d2_t0_min = 0.0;  // curvature range over those midpoint samples
    double d2_t0_max = 0.0;
    double wall_seconds = 0.0;
};

struct SolveResult {
    ValueSurface surface;
    SolveReport report;
};

// Node values of the terminal condition (1/2)(f(T) - x)_+^2, zero at and
// beyond x*.
Eigen::VectorXd terminal_values(const TargetSpec& target, const Eigen::VectorXd& nodes);

// One Hamiltonian sweep: given the fitted derivatives at the nodes, solve the
// per-node weight QP and assemble
//   H_i = r x_i v_x(x_i) + min_pi {...} + (1/(2T)) (f(t) - x_i)_+^2.
// Exposed for tests; the solver calls it internally each step. Minimizers are
// written to `minimizers` (one row per node) when it is non-null.
Eigen::VectorXd hamiltonian_nodes(const MarketParams& params, const TargetSpec& target,
                                  const Eigen::VectorXd& nodes, const Eigen::VectorXd& d1,
                                  const Eigen::VectorXd& d2, double t, long* clamp_count,
                                  Eigen::MatrixXd* minimizers, unsigned threads = 1);

// Backward explicit march of the HJB equation from the terminal condition,
// storing rows every store_every steps (plus steps M and 0; store_every = 0
// stores only those two). Throws BlowUpError when the march leaves the
// trusted value range.
SolveResult solve_hjb(const MarketParams& params, const TargetSpec& target, const GridSpec& grid,
                      long store_every, unsigned threads = 1);

// Node set implied by target and grid (exposed for tests and reporting).
Eigen::VectorXd build_nodes(const TargetSpec& target, const GridSpec& grid);

}  // namespace hjbport
