#include "hjbport/policy.hpp"

#include <algorithm>
#include <cmath>

#include "hjbport/errors.hpp"
#include "hjbport/parallel.hpp"
#include "hjbport/qp.hpp"

namespace hjbport {

namespace {

QpSolution weights_from_derivatives(const MarketParams& params, double t, double x, double d1,
                                    double d2) {
    double curv = std::max(d2, 0.0);
    QpProblem qp;
    qp.quadratic = (x * x * curv) * params.covariance_at(t);
    qp.linear = (x * d1) * (params.drift_at(t).array() - params.rate(t)).matrix();
    qp.cap = params.leverage_cap;
    qp.curvature_clamped = d2 < 0.0;
    return solve_qp(qp);
}

}  // namespace

Eigen::VectorXd optimal_weights(const ValueSurface& surface, const MarketParams& params,
                                double t, double x) {
    const int m = params.num_assets();
    if (!std::isfinite(t) || !std::isfinite(x)) {
        throw InputError("policy query requires finite (t, x)");
    }
    if (x <= 0.0 || x >= surface.xstar()) return Eigen::VectorXd::Zero(m);

    const SurfaceRow& row = surface.row_at_or_below(t);
    const Interpolant interp = surface.interpolant(row);
    const Eigen::VectorXd& nodes = surface.nodes();
    const double x_eval = std::clamp(x, nodes[0], nodes[nodes.size() - 1]);
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    interp.eval_all(x_eval, value, d1, d2);
    return weights_from_derivatives(params, row.time, x_eval, d1, d2).weights;
}

Eigen::MatrixXd node_weight_table(const ValueSurface& surface, const MarketParams& params,
                                  const SurfaceRow& row, unsigned threads) {
    const Eigen::VectorXd& nodes = surface.nodes();
    const int n = static_cast<int>(nodes.size());
    const int m = params.num_assets();
    const Eigen::VectorXd d1 = surface.basis().derivative_matrix_1() * row.coeffs;
    const Eigen::VectorXd d2 = surface.basis().derivative_matrix_2() * row.coeffs;
    const int zero_from = surface.zero_from();

    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(n, m);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t idx) {
        const int i = static_cast<int>(idx);
        if (i == 0 || i >= zero_from) return;
        table.row(i) =
            weights_from_derivatives(params, row.time, nodes[i], d1[i], d2[i]).weights;
    }, threads);
    return table;
}

Eigen::VectorXd interpolate_weights(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& table,
                                    double x) {
    const int n = static_cast<int>(nodes.size());
    if (table.rows() != n) throw InputError("weight table rows must match node count");
    if (n == 1 || x <= nodes[0]) return table.row(0).transpose();
    if (x >= nodes[n - 1]) return table.row(n - 1).transpose();
    const double* begin = nodes.data();
    const double* upper = std::upper_bound(begin, begin + n, x);
    int j = static_cast<int>(upper - begin) - 1;
    j = std::clamp(j, 0, n - 2);
    const double width = nodes[j + 1] - nodes[j];
    const double theta = width > 0.0 ? (x - nodes[j]) / width : 0.0;
    return ((1.0 - theta) * table.row(j) + theta * table.row(j + 1)).transpose();
}

WeightGrid weight_grid(const ValueSurface& surface, const MarketParams& params,
                       const std::vector<double>& times, const std::vector<double>& wealth) {
    WeightGrid grid;
    grid.times = times;
    grid.wealth = wealth;
    grid.weights.reserve(times.size());
    for (double t : times) {
        Eigen::MatrixXd w(static_cast<int>(wealth.size()), params.num_assets());
        for (std::size_t j = 0; j < wealth.size(); ++j) {
            w.row(static_cast<int>(j)) = optimal_weights(surface, params, t, wealth[j]).transpose();
        }
        grid.weights.push_back(std::move(w));
    }
    return grid;
}

}  // namespace hjbport
