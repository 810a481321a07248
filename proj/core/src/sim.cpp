#include "hjbport/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <utility>

#include "hjbport/errors.hpp"
#include "hjbport/parallel.hpp"
#include "hjbport/policy.hpp"
#include "hjbport/rng.hpp"

namespace hjbport {

int intervals_per_year(Rebalance r) {
    switch (r) {
        case Rebalance::Daily: return 252;
        case Rebalance::Weekly: return 52;
        case Rebalance::Monthly: return 12;
        case Rebalance::Quarterly: return 4;
        case Rebalance::Yearly: return 1;
    }
    throw InputError("unknown rebalance frequency");
}

std::string to_string(Rebalance r) {
    switch (r) {
        case Rebalance::Daily: return "daily";
        case Rebalance::Weekly: return "weekly";
        case Rebalance::Monthly: return "monthly";
        case Rebalance::Quarterly: return "quarterly";
        case Rebalance::Yearly: return "yearly";
    }
    throw InputError("unknown rebalance frequency");
}

Rebalance parse_rebalance(const std::string& name) {
    if (name == "daily") return Rebalance::Daily;
    if (name == "weekly") return Rebalance::Weekly;
    if (name == "monthly") return Rebalance::Monthly;
    if (name == "quarterly") return Rebalance::Quarterly;
    if (name == "yearly") return Rebalance::Yearly;
    throw ConfigError("unknown rebalance frequency '" + name +
                      "'; expected daily|weekly|monthly|quarterly|yearly");
}

void SimConfig::validate() const {
    if (path_count < 2) throw ConfigError("path_count must be at least 2");
    if (antithetic && path_count % 2 != 0) {
        throw ConfigError("antithetic sampling needs an even path_count");
    }
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
        throw InputError("covariance must be square and nonempty");
    }
    const double scale = std::max(1e-300, sigma.cwiseAbs().maxCoeff());
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
        throw InputError("covariance must be symmetric");
    }

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd lower = llt.matrixL();
        if ((lower * lower.transpose() - sigma).cwiseAbs().maxCoeff() <= 1e-10 * scale) {
            return lower;
        }
    }

    // Singular or near-singular PSD input: pivoted LDL^T with tiny negative
    // pivots (roundoff) clamped to zero.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    if (ldlt.info() != Eigen::Success) {
        throw InputError("covariance factorization failed; matrix is not PSD");
    }
    Eigen::VectorXd d = ldlt.vectorD();
    for (int i = 0; i < d.size(); ++i) {
        if (d[i] < -1e-10 * scale) {
            throw InputError("covariance is indefinite (negative pivot in LDL^T)");
        }
        d[i] = std::max(d[i], 0.0);
    }
    Eigen::MatrixXd lower = ldlt.matrixL();
    Eigen::MatrixXd factor = lower * d.cwiseSqrt().asDiagonal();
    factor = ldlt.transpositionsP().transpose() * factor;
    if ((factor * factor.transpose() - sigma).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InputError("covariance factorization failed the round-trip check");
    }
    return factor;
}

double percentile_point(const Eigen::VectorXd& values, double level) {
    if (values.size() == 0) throw InputError("percentile of an empty sample");
    if (!(level > 0.0 && level < 1.0)) throw InputError("percentile level must lie in (0,1)");
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const double q = 1.0 - level;
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Histogram tracking_error_histogram(const Eigen::VectorXd& terminal_wealth, double target_level,
                                   double bin_width) {
    if (terminal_wealth.size() == 0) throw InputError("histogram of an empty sample");
    if (!(target_level > 0.0)) throw InputError("histogram requires a positive target level");
    if (!(bin_width > 0.0)) throw InputError("histogram requires a positive bin width");

    const long n = terminal_wealth.size();
    Eigen::VectorXd err = (terminal_wealth.array() - target_level) / target_level;
    // Bin k covers [k w, (k+1) w); alignment at zero makes the below-zero mass
    // exactly the strictly-below-target fraction.
    const auto bin_of = [bin_width](double e) {
        return static_cast<long>(std::floor(e / bin_width));
    };
    long k_min = bin_of(err[0]);
    long k_max = k_min;
    for (long i = 1; i < n; ++i) {
        const long k = bin_of(err[i]);
        k_min = std::min(k_min, k);
        k_max = std::max(k_max, k);
    }

    Histogram hist;
    hist.bin_width = bin_width;
    const long bins = k_max - k_min + 1;
    hist.bin_left.resize(static_cast<std::size_t>(bins));
    hist.mass.assign(static_cast<std::size_t>(bins), 0.0);
    for (long k = 0; k < bins; ++k) {
        hist.bin_left[static_cast<std::size_t>(k)] = static_cast<double>(k + k_min) * bin_width;
    }
    const double w = 1.0 / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
        hist.mass[static_cast<std::size_t>(bin_of(err[i]) - k_min)] += w;
    }
    return hist;
}

SimStats simulate(const MarketParams& params, const TargetSpec& target,
                  const ValueSurface& surface, const SimConfig& cfg, unsigned threads) {
    params.validate();
    target.validate();
    cfg.validate();
    if (surface.horizon() + 1e-9 < target.horizon) {
        throw ConfigError("surface horizon is shorter than the simulation horizon");
    }

    const double horizon = target.horizon;
    const double per_year = intervals_per_year(cfg.rebalance);
    const double exact_intervals = horizon * per_year;
    const long n_intervals = static_cast<long>(std::llround(exact_intervals));
    if (n_intervals < 1 || std::abs(exact_intervals - static_cast<double>(n_intervals)) > 1e-9) {
        throw ConfigError("horizon is not a whole number of rebalance intervals");
    }
    const long steps = surface.grid().time_steps;
    if (steps % n_intervals != 0) {
        throw ConfigError("time_steps must be a multiple of the rebalance interval count so "
                          "surface rows align with rebalance dates");
    }
    const long stride = steps / n_intervals;
    const double dt = horizon / static_cast<double>(n_intervals);

    const int m = params.num_assets();
    const Eigen::MatrixXd sigma = params.covariance;
    const Eigen::MatrixXd scaled_factor = cholesky_factor(sigma) * std::sqrt(dt);
    const Eigen::VectorXd log_drift = (params.drift - 0.5 * sigma.diagonal()) * dt;

    // Policy tables for every rebalance date except the terminal one.
    std::vector<Eigen::MatrixXd> tables;
    if (cfg.policy_eval == PolicyEval::TableLinear) {
        tables.resize(static_cast<std::size_t>(n_intervals));
        parallel_for(static_cast<std::size_t>(n_intervals), [&](std::size_t j) {
            tables[j] = node_weight_table(surface, params, surface.row_at_step(
                static_cast<long>(j) * stride));
        }, threads);
    } else {
        for (long j = 0; j < n_intervals; ++j) {
            surface.row_at_step(j * stride);  // fail fast on misalignment
        }
    }

    const long n_paths = cfg.path_count;
    const long n_dates = n_intervals + 1;
    const double x0 = target.start_wealth();
    const Eigen::VectorXd& nodes = surface.nodes();

    // One column per path; serial reduction afterwards keeps the aggregate
    // statistics bit-identical for any thread count.
    Eigen::MatrixXf samples(n_dates, n_paths);
    Eigen::VectorXd terminal(n_paths);
    std::atomic<long> floor_events{0};

    parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
        const auto path = static_cast<long>(p);
        const std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(path / 2)
                                                    : static_cast<std::uint64_t>(path);
        const double sign = (cfg.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        CounterRng rng(cfg.seed, stream);

        Eigen::VectorXd z(m);
        Eigen::VectorXd growth(m);
        double x = x0;
        samples(0, path) = static_cast<float>(x);
        bool absorbed = false;
        for (long j = 0; j < n_intervals; ++j) {
            if (!absorbed) {
                const double t_j = static_cast<double>(j) * dt;
                Eigen::VectorXd w =
                    cfg.policy_eval == PolicyEval::TableLinear
                        ? interpolate_weights(nodes, tables[static_cast<std::size_t>(j)], x)
                        : optimal_weights(surface, params, t_j, x);
                for (int a = 0; a < m; ++a) {
                    const std::uint64_t idx = static_cast<std::uint64_t>(j) *
                                                  static_cast<std::uint64_t>(m) +
                                              static_cast<std::uint64_t>(a);
                    const auto pair = rng.normal_pair(idx >> 1);
                    z[a] = sign * ((idx & 1) ? pair.second : pair.first);
                }
                growth = (log_drift + scaled_factor * z).array().exp() - 1.0;
                const double bond = std::expm1(params.rate(t_j) * dt);
                const double factor = 1.0 + w.dot(growth) + (1.0 - w.sum()) * bond;
                x *= factor;
                if (x <= 0.0 || !std::isfinite(x)) {
                    x = 0.0;
                    absorbed = true;
                    floor_events.fetch_add(1, std::memory_order_relaxed);
                }
            }
            samples(j + 1, path) = static_cast<float>(x);
        }
        terminal[path] = x;
    }, threads);

    SimStats stats;
    stats.floor_events = floor_events.load();
    stats.terminal_wealth = terminal;
    stats.dates.resize(static_cast<std::size_t>(n_dates));
    Eigen::VectorXd row(n_paths);
    for (long d = 0; d < n_dates; ++d) {
        const double t_d = static_cast<double>(d) * dt;
        const double level = target.required_level(t_d);
        DateStats ds;
        ds.time = t_d;
        ds.target_level = level;
        if (d == n_dates - 1) {
            row = terminal;  // keep terminal stats exactly consistent with the histogram
        } else {
            row = samples.row(d).transpose().cast<double>();
        }
        double sum = 0.0;
        long above = 0;
        for (long p = 0; p < n_paths; ++p) {
            sum += row[p];
            if (row[p] >= level) ++above;
        }
        ds.mean_wealth = sum / static_cast<double>(n_paths);
        ds.achievement_rate = static_cast<double>(above) / static_cast<double>(n_paths);
        ds.percentile_point = percentile_point(row, 0.95);
        stats.dates[static_cast<std::size_t>(d)] = ds;
    }

    stats.tracking_error =
        tracking_error_histogram(terminal, target.required_level(horizon), 0.005);
    return stats;
}

}  // namespace hjbport
