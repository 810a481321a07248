#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hjbport/hjb.hpp"
#include "hjbport/market.hpp"

namespace hjbport {

enum class Rebalance { Daily, Weekly, Monthly, Quarterly, Yearly };

int intervals_per_year(Rebalance r);
std::string to_string(Rebalance r);
Rebalance parse_rebalance(const std::string& name);

// How the simulator turns the solved surface into weights at a rebalance
// date. TableLinear solves the QP at the collocation nodes once per date and
// interpolates the weights linearly in wealth (the scheme the reference
// statistics are built on; interpolation between feasible vertices stays
// feasible). ExactQp re-solves the QP at the exact wealth of every path.
enum class PolicyEval { TableLinear, ExactQp };

struct SimConfig {
    long path_count = 10000;
    Rebalance rebalance = Rebalance::Monthly;
    std::uint64_t seed = 12345;
    bool antithetic = false;
    PolicyEval policy_eval = PolicyEval::TableLinear;

    void validate() const;
};

struct DateStats {
    double time = 0.0;
    double mean_wealth = 0.0;
    double achievement_rate = 0.0;  // fraction of paths at or above target_level
    double percentile_point = 0.0;  // wealth that 95% of paths meet or exceed
    double target_level = 0.0;      // required level f(t) (no margin)
};

struct Histogram {
    double bin_width = 0.0;
    std::vector<double> bin_left;  // left edge of each bin; width is uniform
    std::vector<double> mass;      // sums to 1
};

struct SimStats {
    std::vector<DateStats> dates;
    Histogram tracking_error;          // of (X_T - f(T)) / f(T)
    long floor_events = 0;             // paths absorbed at zero wealth
    Eigen::VectorXd terminal_wealth;   // per path
};

// Lower-triangular factor with L L^T = sigma. Singular PSD inputs use a
// pivoted semidefinite factorization; the result is then a row permutation of
// a lower-triangular factor (the round-trip identity still holds).
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& sigma);

// Wealth level that `level` of the sample meets or exceeds: the linearly
// interpolated order statistic at probability 1 - level.
double percentile_point(const Eigen::VectorXd& values, double level = 0.95);

// Relative tracking error (x - target) / target binned at fixed width with
// bin edges aligned at zero, so the mass below zero is exactly the fraction
// of paths strictly below target.
Histogram tracking_error_histogram(const Eigen::VectorXd& terminal_wealth, double target_level,
                                   double bin_width = 0.005);

// Monte Carlo evaluation of the solved policy: exact multivariate GBM between
// rebalance dates, self-financing wealth update, floor-and-absorb at zero.
// Statistics are reported against the required level (margin excluded).
// Deterministic for a given (seed, config), independent of thread count.
SimStats simulate(const MarketParams& params, const TargetSpec& target,
                  const ValueSurface& surface, const SimConfig& cfg, unsigned threads = 1);

}  // namespace hjbport
