// End-to-end reproduction of the reference statistics: solves the shipped
// presets, simulates them, and checks the headline numbers against pinned
// tolerances. Prints one verdict line per criterion; the exit code is the
// number of failed criteria, so a zero exit means the build reproduces the
// published behavior.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <hjbport/config.hpp>
#include <hjbport/errors.hpp>
#include <hjbport/hjb.hpp>
#include <hjbport/market.hpp>
#include <hjbport/qp.hpp>
#include <hjbport/rbf.hpp>
#include <hjbport/sim.hpp>

using namespace hjbport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct RunOut {
    ExperimentConfig cfg;
    SolveResult sol;
    SimStats stats;
    double secs = 0.0;
};

RunOut run_preset(const std::string& name) {
    const ExperimentConfig cfg = preset(name);
    const auto t0 = Clock::now();
    SolveResult sol = solve_hjb(cfg.market, cfg.target, cfg.grid, cfg.store_stride(), 1);
    SimStats stats = simulate(cfg.market, cfg.target, sol.surface, cfg.sim, 1);
    return RunOut{cfg, std::move(sol), std::move(stats), seconds_since(t0)};
}

const DateStats& at_time(const SimStats& stats, double t) {
    for (const auto& d : stats.dates) {
        if (std::abs(d.time - t) < 1e-9) return d;
    }
    throw InputError("no simulation date at t=" + std::to_string(t));
}

bool within(double value, double center, double tol) {
    return std::abs(value - center) <= tol;
}

double pct(double x) { return 100.0 * x; }

int g_failures = 0;

void verdict(int index, const char* label, bool ok, const std::string& detail) {
    std::printf("[%d/7] %-26s %s  %s\n", index, label, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void fail_with_error(int index, const char* label, const std::exception& e) {
    verdict(index, label, false, std::string("exception: ") + e.what());
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

}  // namespace

int main() {
    const auto t_start = Clock::now();

    // Shared runs: the no-margin and 0.2% margin experiments feed the margin
    // sweep, the terminal-year check, the stabilization reference, and the
    // statistic-identity property.
    std::optional<RunOut> m00_run, m20_run;
    std::string shared_err;
    try {
        m00_run = run_preset("margin-00bp");
        m20_run = run_preset("margin-20bp");
    } catch (const std::exception& e) {
        shared_err = e.what();
    }
    const bool shared_ok = m00_run.has_value() && m20_run.has_value();

    // 1. Margin sweep: terminal statistics with and without a margin.
    if (shared_ok) {
        const RunOut& m00 = *m00_run;
        const RunOut& m20 = *m20_run;
        const double a_T_0 = m00.stats.dates.back().achievement_rate;
        const double a_half_0 = at_time(m00.stats, m00.cfg.target.horizon / 2.0).achievement_rate;
        const DateStats& last20 = m20.stats.dates.back();
        const double sweep_secs = m00.secs + m20.secs;
        const bool ok = within(a_T_0, 0.31, 0.04) && within(a_half_0, 0.63, 0.04) &&
                        within(last20.mean_wealth, 110.7, 0.5) &&
                        within(last20.achievement_rate, 0.74, 0.04) &&
                        within(last20.percentile_point, 106.6, 0.5) && sweep_secs <= 600.0;
        verdict(1, "margin sweep", ok,
                fmt("no margin: A_T=%.1f%% (31+-4), A_half=%.1f%% (63+-4); margin 0.2%%: "
                    "mean=%.2f (110.7+-0.5), A_T=%.1f%% (74+-4), P95=%.2f (106.6+-0.5); %.0fs",
                    pct(a_T_0), pct(a_half_0), last20.mean_wealth, pct(last20.achievement_rate),
                    last20.percentile_point, sweep_secs));
    } else {
        verdict(1, "margin sweep", false, "exception: " + shared_err);
    }

    // 2. Required-return and leverage-cap sweep on the artificial market.
    try {
        const RunOut r1c5 = run_preset("leverage-r1-cap5");
        const RunOut r3c1 = run_preset("leverage-r3-cap1");
        const RunOut r2c2 = run_preset("leverage-r2-cap2");
        const double a15 = r1c5.stats.dates.back().achievement_rate;
        const double x15 = r1c5.stats.dates.back().mean_wealth;
        const double a31 = r3c1.stats.dates.back().achievement_rate;
        const double a22 = r2c2.stats.dates.back().achievement_rate;
        const bool ok = a15 >= 0.96 && within(x15, 112.0, 0.5) && a31 <= 0.03 &&
                        within(a22, 0.76, 0.05);
        verdict(2, "leverage/target sweep", ok,
                fmt("r=1%% cap=5: A_T=%.1f%% (>=96), mean=%.2f (112.0+-0.5); r=3%% cap=1: "
                    "A_T=%.1f%% (<=3); r=2%% cap=2: A_T=%.1f%% (76+-5)",
                    pct(a15), x15, pct(a31), pct(a22)));
    } catch (const std::exception& e) {
        fail_with_error(2, "leverage/target sweep", e);
    }

    // 3. Rebalance robustness: terminal achievement is calendar-insensitive.
    try {
        const char* names[] = {"rebalance-t10-daily", "rebalance-t10-weekly",
                               "rebalance-t10-monthly", "rebalance-t10-quarterly",
                               "rebalance-t10-yearly"};
        double lo = 1.0, hi = 0.0;
        std::string listing;
        for (const char* name : names) {
            const RunOut run = run_preset(name);
            const double a = run.stats.dates.back().achievement_rate;
            lo = std::min(lo, a);
            hi = std::max(hi, a);
            listing += fmt("%s=%.1f%% ", name + sizeof("rebalance-t10-") - 1, pct(a));
        }
        const double span = hi - lo;
        verdict(3, "rebalance robustness", span <= 0.03,
                fmt("A_T span=%.2fpp (<=3pp): %s", 100.0 * span, listing.c_str()));
    } catch (const std::exception& e) {
        fail_with_error(3, "rebalance robustness", e);
    }

    // 4. Terminal-year behavior: the no-margin run collapses into the
    // deadline; the margined run keeps a non-decreasing achievement rate.
    if (shared_ok) {
        const RunOut& m00 = *m00_run;
        const RunOut& m20 = *m20_run;
        const double horizon = m00.cfg.target.horizon;
        const double a9 = at_time(m00.stats, horizon - 1.0).achievement_rate;
        const double aT = m00.stats.dates.back().achievement_rate;
        const double drop = a9 - aT;

        bool monotone = true;
        double worst_dip = 0.0;
        const auto& dates = m20.stats.dates;
        for (std::size_t i = 0; i + 1 < dates.size(); ++i) {
            if (dates[i].time < horizon - 1.0 - 1e-9) continue;
            const double dip = dates[i].achievement_rate - dates[i + 1].achievement_rate;
            worst_dip = std::max(worst_dip, dip);
            if (dip > 0.02) monotone = false;
        }
        const bool ok = drop >= 0.30 && monotone;
        verdict(4, "terminal-year behavior", ok,
                fmt("no margin: A drops %.1fpp over final year (>=30); margin 0.2%%: worst "
                    "final-year dip %.2fpp (<=2)",
                    100.0 * drop, 100.0 * worst_dip));
    } else {
        verdict(4, "terminal-year behavior", false, "exception: " + shared_err);
    }

    // 5. Income-profile experiment: leverage caps on the estimated four-asset
    // market with the tabulated net-payout target.
    try {
        const RunOut cap1 = run_preset("pension-cap1");
        const RunOut cap5 = run_preset("pension-cap5");
        const RunOut cap10 = run_preset("pension-cap10");
        const double a1 = cap1.stats.dates.back().achievement_rate;
        const double a5 = cap5.stats.dates.back().achievement_rate;
        const double a10 = cap10.stats.dates.back().achievement_rate;
        const double x10 = cap10.stats.dates.back().mean_wealth;
        const bool ok = a1 <= 0.05 && within(a5, 0.81, 0.05) && within(x10, 16.47, 0.4) &&
                        within(a10, 0.87, 0.04);
        verdict(5, "income-profile leverage", ok,
                fmt("cap=1: A_T=%.1f%% (<=5); cap=5: A_T=%.1f%% (81+-5); cap=10: mean=%.2f "
                    "(16.47+-0.4), A_T=%.1f%% (87+-4)",
                    pct(a1), pct(a5), x10, pct(a10)));
    } catch (const std::exception& e) {
        fail_with_error(5, "income-profile leverage", e);
    }

    // 6. Boundary stabilization: without the node pad the t=0 curvature
    // oscillates near the truncation boundary; with it the curvature stays
    // one-signed up to a 1e-4 relative tolerance.
    if (shared_ok) {
        const RunOut& m00 = *m00_run;
        try {
            ExperimentConfig bare = preset("margin-00bp");
            bare.grid.extra_nodes = 0;
            const SolveResult sol0 =
                solve_hjb(bare.market, bare.target, bare.grid, bare.store_stride(), 1);
            const SolveReport& padded = m00.sol.report;
            const bool ok = sol0.report.boundary_oscillation &&
                            !padded.boundary_oscillation &&
                            padded.d2_t0_min >= -1e-4 * padded.d2_t0_max;
            verdict(6, "boundary stabilization", ok,
                    fmt("extra_nodes=0: oscillation=%d (want 1); extra_nodes=5: oscillation=%d "
                        "(want 0), d2 range [%.3g, %.3g] with min >= -1e-4*max",
                        sol0.report.boundary_oscillation ? 1 : 0,
                        padded.boundary_oscillation ? 1 : 0, padded.d2_t0_min,
                        padded.d2_t0_max));
        } catch (const std::exception& e) {
            fail_with_error(6, "boundary stabilization", e);
        }
    } else {
        verdict(6, "boundary stabilization", false, "exception: " + shared_err);
    }

    // 7. Component properties: interpolation exactness, derivative formulas,
    // the constrained optimizer against an exhaustive oracle, value-surface
    // invariants, statistic identities, and seed determinism.
    try {
        if (!shared_ok) throw InputError("shared margin run failed: " + shared_err);
        const RunOut& m00 = *m00_run;
        std::string parts;
        bool ok = true;

        // Interpolation reproduces its node data.
        std::mt19937 gen(20240814u);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const int n = 41;
        Eigen::VectorXd centers(n), values(n);
        for (int i = 0; i < n; ++i) {
            centers[i] = 0.5 * i;
            values[i] = unif(gen);
        }
        const Interpolant interp = fit_interpolant(centers, values, 0.25);
        double node_err = 0.0;
        for (int i = 0; i < n; ++i) {
            node_err = std::max(node_err, std::abs(interp.eval(centers[i]) - values[i]));
        }
        ok = ok && node_err <= 1e-8;
        parts += fmt("node_err=%.1e (<=1e-8); ", node_err);

        // Analytic kernel and interpolant derivatives match finite differences.
        Eigen::VectorXd smooth(n);
        for (int i = 0; i < n; ++i) smooth[i] = std::sin(0.4 * centers[i]);
        const Interpolant smooth_fit = fit_interpolant(centers, smooth, 0.25);
        const Multiquadric kernel(0.25);
        double fd_err = 0.0;
        const double h1 = 1e-6, h2 = 1e-5;
        for (int i = 0; i < 30; ++i) {
            const double x = 0.31 + 0.63 * i;
            const double kd1 = (kernel.phi(std::abs(x)) - kernel.phi(std::abs(x - 2 * h1))) /
                               (2 * h1);
            fd_err = std::max(fd_err, std::abs(kernel.d1(x - h1) - kd1) / std::max(1.0, std::abs(kd1)));
            const double fd = (smooth_fit.eval(x + h2) - smooth_fit.eval(x - h2)) / (2 * h2);
            fd_err = std::max(fd_err,
                              std::abs(smooth_fit.eval_d1(x) - fd) / std::max(1.0, std::abs(fd)));
            const double fdd = (smooth_fit.eval_d1(x + h2) - smooth_fit.eval_d1(x - h2)) / (2 * h2);
            fd_err = std::max(fd_err,
                              std::abs(smooth_fit.eval_d2(x) - fdd) / std::max(1.0, std::abs(fdd)));
        }
        ok = ok && fd_err <= 1e-5;
        parts += fmt("fd_err=%.1e (<=1e-5); ", fd_err);

        // Constrained optimizer against an exhaustive lattice search.
        std::normal_distribution<double> gauss(0.0, 0.6);
        double worst_gap = 0.0, worst_kkt = 0.0;
        bool qp_ok = true;
        for (int rep = 0; rep < 200; ++rep) {
            const int m = 1 + rep % 3;
            Eigen::MatrixXd a(m, m);
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) a(r, c) = gauss(gen);
            QpProblem prob;
            prob.quadratic = a.transpose() * a;
            prob.linear.resize(m);
            for (int r = 0; r < m; ++r) {
                prob.linear[r] = (unif(gen) < 0.5 ? -1.0 : 1.0) * (0.4 + 1.1 * unif(gen));
            }
            prob.cap = 0.6 + 0.3 * (rep % 3);
            const double step = prob.cap / 120.0;
            const QpSolution fast = solve_qp(prob);
            const QpSolution grid = brute_force_qp(prob, step);
            const double bound = 2.0 * step * prob.linear.cwiseAbs().sum();
            qp_ok = qp_ok && fast.objective <= grid.objective + 1e-9 &&
                    std::abs(fast.objective - grid.objective) <= bound;
            worst_gap = std::max(worst_gap,
                                 std::abs(fast.objective - grid.objective) / bound);
            const double scale =
                std::max(1.0, prob.linear.cwiseAbs().maxCoeff() +
                                  prob.quadratic.cwiseAbs().maxCoeff() * prob.cap);
            qp_ok = qp_ok && fast.kkt_residual <= 1e-7 * scale;
            worst_kkt = std::max(worst_kkt, fast.kkt_residual / scale);
        }
        ok = ok && qp_ok;
        parts += fmt("qp gap<=%.2f of bound, kkt=%.1e (<=1e-7); ", worst_gap, worst_kkt);

        // Value-surface bounds and monotonicity on the solved no-margin run.
        bool surface_ok = true;
        for (const SurfaceRow& row : m00.sol.surface.rows()) {
            const double cap = m00.cfg.target.boundary_left_value(row.time);
            const double tol = 1e-6 * (m00.cfg.target.boundary_left_value(0.0) + 1.0);
            for (int i = 0; i < row.values.size(); ++i) {
                surface_ok = surface_ok && row.values[i] >= -tol && row.values[i] <= cap + tol;
                if (i + 1 < row.values.size()) {
                    surface_ok = surface_ok && row.values[i + 1] <= row.values[i] + tol;
                }
            }
        }
        ok = ok && surface_ok;
        parts += fmt("surface bounds/monotone=%s; ", surface_ok ? "yes" : "NO");

        // Achievement equals one minus the tracking-error mass below zero.
        double below = 0.0;
        const Histogram& hist = m00.stats.tracking_error;
        for (std::size_t b = 0; b < hist.mass.size(); ++b) {
            if (hist.bin_left[b] < -1e-15) below += hist.mass[b];
        }
        const double identity_err =
            std::abs(m00.stats.dates.back().achievement_rate - (1.0 - below));
        ok = ok && identity_err <= 1e-12;
        parts += fmt("A_T identity err=%.1e (<=1e-12); ", identity_err);

        // Same seed, same bits; different seed, different sample.
        SimConfig sim = m00.cfg.sim;
        sim.path_count = 2000;
        sim.seed = 31415;
        const SimStats s1 = simulate(m00.cfg.market, m00.cfg.target, m00.sol.surface, sim, 1);
        const SimStats s2 = simulate(m00.cfg.market, m00.cfg.target, m00.sol.surface, sim, 1);
        sim.seed = 31416;
        const SimStats s3 = simulate(m00.cfg.market, m00.cfg.target, m00.sol.surface, sim, 1);
        const bool det = (s1.terminal_wealth - s2.terminal_wealth).cwiseAbs().maxCoeff() == 0.0;
        const bool varies = (s1.terminal_wealth - s3.terminal_wealth).cwiseAbs().maxCoeff() > 0.0;
        ok = ok && det && varies;
        parts += fmt("seed determinism=%s", det && varies ? "bit-exact" : "BROKEN");

        verdict(7, "component properties", ok, parts);
    } catch (const std::exception& e) {
        fail_with_error(7, "component properties", e);
    }

    std::printf("%d of 7 criteria passed in %.0fs\n", 7 - g_failures, seconds_since(t_start));
    return g_failures;
}
