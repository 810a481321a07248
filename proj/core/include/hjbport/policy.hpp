#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hjbport/hjb.hpp"
#include "hjbport/market.hpp"

namespace hjbport {

// Optimal portfolio weights at (t, x): evaluates the stored surface row with
// the largest t_k <= t, differentiates the interpolant at x itself, and
// solves the weight QP there. Zero weights at x = 0 and at or above x*.
Eigen::VectorXd optimal_weights(const ValueSurface& surface, const MarketParams& params,
                                double t, double x);

// Weights at every collocation node for one stored row, solving the QP on the
// node derivatives. Rows at x = 0 and at or above x* are zero. This is the
// table the simulator interpolates between rebalance dates.
Eigen::MatrixXd node_weight_table(const ValueSurface& surface, const MarketParams& params,
                                  const SurfaceRow& row, unsigned threads = 1);

// Piecewise-linear interpolation in x of a node weight table. Weights are
// affine between neighbouring nodes, so convexity keeps the result inside the
// feasible simplex. Clamps x to the node range.
Eigen::VectorXd interpolate_weights(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& table,
                                    double x);

// Policy lattice for reporting: weights[i] holds the (wealth x assets) matrix
// of optimal weights at times[i].
struct WeightGrid {
    std::vector<double> times;
    std::vector<double> wealth;
    std::vector<Eigen::MatrixXd> weights;
};

WeightGrid weight_grid(const ValueSurface& surface, const MarketParams& params,
                       const std::vector<double>& times, const std::vector<double>& wealth);

}  // namespace hjbport
