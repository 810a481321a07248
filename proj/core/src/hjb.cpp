#include "hjbport/hjb.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "hjbport/errors.hpp"
#include "hjbport/parallel.hpp"
#include "hjbport/qp.hpp"

namespace hjbport {

namespace {

// First node index at or above x*, with a snap tolerance so an x* that lands
// on a grid point up to rounding is treated as on-grid.
int first_pinned_node(const Eigen::VectorXd& nodes, double xstar) {
    const double tol = 1e-9 * std::max(1.0, xstar);
    for (int i = 0; i < nodes.size(); ++i) {
        if (nodes[i] >= xstar - tol) return i;
    }
    return static_cast<int>(nodes.size());
}

}  // namespace

void GridSpec::validate() const {
    if (!(h_x > 0.0) || !std::isfinite(h_x)) {
        throw ConfigError("grid spacing h_x must be positive and finite");
    }
    if (extra_nodes < 0) throw ConfigError("extra_nodes must be nonnegative");
    if (time_steps < 1) throw ConfigError("time_steps must be at least 1");
    if (!(shape_factor > 0.0) || !std::isfinite(shape_factor)) {
        throw ConfigError("shape_factor must be positive and finite");
    }
}

Eigen::VectorXd build_nodes(const TargetSpec& target, const GridSpec& grid) {
    grid.validate();
    const double xstar = target.x_star();
    const long below = static_cast<long>(std::ceil(xstar / grid.h_x - 1e-9));
    const long n = below + 1 + grid.extra_nodes;
    if (n < 3) throw ConfigError("grid would have fewer than 3 nodes; shrink h_x");
    if (n > 100000) throw ConfigError("grid would exceed 100000 nodes; enlarge h_x");
    Eigen::VectorXd nodes(n);
    for (long i = 0; i < n; ++i) nodes[i] = static_cast<double>(i) * grid.h_x;
    return nodes;
}

ValueSurface::ValueSurface(GridSpec grid, double horizon, double xstar,
                           std::shared_ptr<const RbfBasis> basis, std::vector<SurfaceRow> rows)
    : grid_(std::move(grid)),
      horizon_(horizon),
      xstar_(xstar),
      zero_from_(0),
      basis_(std::move(basis)),
      rows_(std::move(rows)) {
    if (!basis_) throw InputError("value surface requires a basis");
    if (rows_.empty()) throw InputError("value surface requires at least one row");
    for (std::size_t j = 1; j < rows_.size(); ++j) {
        if (rows_[j].step <= rows_[j - 1].step) {
            throw InputError("surface rows must have strictly increasing steps");
        }
    }
    zero_from_ = first_pinned_node(basis_->centers(), xstar_);
}

const SurfaceRow& ValueSurface::row_at_or_below(double t) const {
    const double tol = 1e-9 * std::max(1.0, horizon_);
    const SurfaceRow* best = nullptr;
    for (const auto& row : rows_) {
        if (row.time <= t + tol) best = &row;
        else break;
    }
    if (best == nullptr) {
        throw InputError("no stored surface row at or before the requested time");
    }
    return *best;
}

const SurfaceRow& ValueSurface::row_at_step(long k) const {
    long lo = 0;
    long hi = static_cast<long>(rows_.size()) - 1;
    while (lo <= hi) {
        const long mid = (lo + hi) / 2;
        if (rows_[mid].step == k) return rows_[mid];
        if (rows_[mid].step < k) lo = mid + 1;
        else hi = mid - 1;
    }
    throw ConfigError("no stored surface row for step " + std::to_string(k) +
                      "; choose a store stride aligned with the rebalance dates");
}

Interpolant ValueSurface::interpolant(const SurfaceRow& row) const {
    return Interpolant(basis_, row.coeffs);
}

Eigen::VectorXd terminal_values(const TargetSpec& target, const Eigen::VectorXd& nodes) {
    const double f_end = target.target(target.horizon);
    Eigen::VectorXd v(nodes.size());
    for (int i = 0; i < nodes.size(); ++i) {
        const double gap = f_end - nodes[i];
        v[i] = gap > 0.0 ? 0.5 * gap * gap : 0.0;
    }
    return v;
}

Eigen::VectorXd hamiltonian_nodes(const MarketParams& params, const TargetSpec& target,
                                  const Eigen::VectorXd& nodes, const Eigen::VectorXd& d1,
                                  const Eigen::VectorXd& d2, double t, long* clamp_count,
                                  Eigen::MatrixXd* minimizers, unsigned threads) {
    const int n = static_cast<int>(nodes.size());
    if (d1.size() != n || d2.size() != n) {
        throw InputError("derivative vectors must match the node count");
    }
    const int m = params.num_assets();
    const double r = params.rate(t);
    const Eigen::MatrixXd sigma = params.covariance_at(t);
    const Eigen::VectorXd excess = params.drift_at(t).array() - r;
    const double level = target.target(t);
    const double inv_2T = 1.0 / (2.0 * target.horizon);

    Eigen::VectorXd h(n);
    if (minimizers != nullptr) minimizers->setZero(n, m);
    std::atomic<long> clamps{0};

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t idx) {
        const int i = static_cast<int>(idx);
        const double x = nodes[i];
        double curv = d2[i];
        bool clamped = false;
        if (curv < 0.0) {
            curv = 0.0;
            clamped = true;
        }
        QpProblem qp;
        qp.quadratic = (x * x * curv) * sigma;
        qp.linear = (x * d1[i]) * excess;
        qp.cap = params.leverage_cap;
        qp.curvature_clamped = clamped;
        const QpSolution sol = solve_qp(qp);
        if (clamped && x > 0.0) clamps.fetch_add(1, std::memory_order_relaxed);
        const double gap = level - x;
        const double run_cost = gap > 0.0 ? inv_2T * gap * gap : 0.0;
        h[i] = r * x * d1[i] + sol.objective + run_cost;
        if (minimizers != nullptr) minimizers->row(i) = sol.weights.transpose();
    }, threads);

    if (clamp_count != nullptr) *clamp_count += clamps.load();
    return h;
}

SolveResult solve_hjb(const MarketParams& params, const TargetSpec& target, const GridSpec& grid,
                      long store_every, unsigned threads) {
    params.validate();
    target.validate();
    grid.validate();
    if (store_every < 0) throw ConfigError("store_every must be nonnegative");
    const long steps = grid.time_steps;
    if (store_every > 0 && steps % store_every != 0) {
        throw ConfigError("store_every must divide time_steps so stored rows hit the "
                          "rebalance dates");
    }

    const auto t_start = std::chrono::steady_clock::now();

    const Eigen::VectorXd nodes = build_nodes(target, grid);
    const double xstar = target.x_star();
    const int zero_from = first_pinned_node(nodes, xstar);
    if (zero_from < 2) throw ConfigError("x* leaves fewer than 2 nodes below it; shrink h_x");

    auto basis = std::make_shared<RbfBasis>(nodes, grid.shape());
    const Eigen::MatrixXd der1 = basis->derivative_matrix_1();
    const Eigen::MatrixXd der2 = basis->derivative_matrix_2();

    SolveReport report;
    report.condition_estimate = basis->condition_estimate();
    report.condition_warning = basis->condition_warning();

    const double h_t = target.horizon / static_cast<double>(steps);
    Eigen::VectorXd v = terminal_values(target, nodes);
    // The exact solution is bounded by the zero-wealth value at t=0; anything
    // far beyond that is a diverging march.
    const double blow_up_bound = 10.0 * (target.boundary_left_value(0.0) + 1.0);

    std::vector<SurfaceRow> rows;
    const long stored = store_every > 0 ? steps / store_every + 1 : 2;
    rows.reserve(static_cast<std::size_t>(stored));

    Eigen::VectorXd coeffs, d1, d2;
    for (long k = steps; k >= 0; --k) {
        const double t_k = static_cast<double>(k) * h_t;
        coeffs = basis->fit_coefficients(v);
        d1.noalias() = der1 * coeffs;
        d2.noalias() = der2 * coeffs;

        const bool store = k == steps || k == 0 || (store_every > 0 && k % store_every == 0);
        if (store) {
            rows.push_back({k, t_k, v, coeffs});
            report.row_d2_min.push_back(d2.minCoeff());
            report.row_d2_max.push_back(d2.maxCoeff());
        }
        if (k == 0) {
            // Curvature sampled between the last five interior nodes, where
            // the kernel's alternating node artifact cancels (see SolveReport).
            const Multiquadric& kernel = basis->kernel();
            const int first = std::max(1, zero_from - 5);
            bool have_prev = false;
            double prev = 0.0, lo = 0.0, hi = 0.0;
            for (int i = first; i + 1 < zero_from; ++i) {
                const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
                double c = 0.0;
                for (int j = 0; j < nodes.size(); ++j) {
                    c += coeffs[j] * kernel.d2(mid - nodes[j]);
                }
                if (!have_prev) {
                    lo = hi = c;
                    have_prev = true;
                } else {
                    if (prev * c < 0.0) report.boundary_oscillation = true;
                    lo = std::min(lo, c);
                    hi = std::max(hi, c);
                }
                prev = c;
            }
            report.d2_t0_min = lo;
            report.d2_t0_max = hi;
            const double mono_tol = 1e-6 * v[0];
            for (int i = 0; i + 1 <= zero_from && i + 1 < nodes.size(); ++i) {
                if (v[i + 1] > v[i] + mono_tol) {
                    report.boundary_oscillation = true;
                    break;
                }
            }
            break;
        }

        const Eigen::VectorXd ham = hamiltonian_nodes(params, target, nodes, d1, d2, t_k,
                                                      &report.curvature_clamps, nullptr, threads);
        v += h_t * ham;

        const double t_prev = static_cast<double>(k - 1) * h_t;
        v[0] = target.boundary_left_value(t_prev);
        for (int i = zero_from; i < nodes.size(); ++i) v[i] = 0.0;

        for (int i = 0; i < nodes.size(); ++i) {
            if (!std::isfinite(v[i]) || std::abs(v[i]) > blow_up_bound) {
                throw BlowUpError("value march diverged", k - 1, i);
            }
        }
    }

    std::reverse(rows.begin(), rows.end());
    std::reverse(report.row_d2_min.begin(), report.row_d2_min.end());
    std::reverse(report.row_d2_max.begin(), report.row_d2_max.end());

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    ValueSurface surface(grid, target.horizon, xstar, std::move(basis), std::move(rows));
    return SolveResult{std::move(surface), std::move(report)};
}

}  // namespace hjbport
