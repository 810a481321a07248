// Command-line front end: solve a configuration to a surface checkpoint,
// simulate the stored policy, and turn statistics into plot-ready series.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "hjbport/config.hpp"
#include "hjbport/errors.hpp"
#include "hjbport/io.hpp"
#include "hjbport/policy.hpp"

namespace {

using namespace hjbport;

struct CommonOpts {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_source = true) {
    if (with_source) {
        cmd->add_option("--config", opts.config_path, "experiment config JSON file");
        cmd->add_option("--preset", opts.preset_name, "built-in experiment preset name");
    }
    cmd->add_option("--out", opts.out_dir, "output directory (default: config output_dir)");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware count)");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
    if (!opts.config_path.empty() && !opts.preset_name.empty()) {
        throw ConfigError("pass either --config or --preset, not both");
    }
    if (!opts.config_path.empty()) return load_config(opts.config_path);
    if (!opts.preset_name.empty()) return preset(opts.preset_name);
    throw ConfigError("one of --config or --preset is required");
}

std::filesystem::path out_base(const ExperimentConfig& cfg, const CommonOpts& opts) {
    const std::string dir = opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
    return std::filesystem::path(dir) / cfg.name;
}

std::string surface_path(const std::filesystem::path& base) { return base.string() + ".surface"; }

void run_solve(const ExperimentConfig& cfg, const CommonOpts& opts) {
    const auto base = out_base(cfg, opts);
    const SolveResult result = solve_hjb(cfg.market, cfg.target, cfg.grid, cfg.store_stride(),
                                         opts.threads);
    save_surface(surface_path(base), result.surface, config_hash(cfg));
    atomic_write(base.string() + ".solve_report.json", solve_report_to_json(result.report));
    atomic_write(base.string() + ".config.json", serialize_config(cfg) + "\n");
    std::printf("%s: solved %ld steps on %ld nodes in %.1fs  condition=%.2e%s  clamps=%ld%s\n",
                cfg.name.c_str(), cfg.grid.time_steps,
                static_cast<long>(result.surface.nodes().size()), result.report.wall_seconds,
                result.report.condition_estimate,
                result.report.condition_warning ? " (WARNING: ill-conditioned)" : "",
                result.report.curvature_clamps,
                result.report.boundary_oscillation ? "  boundary-oscillation" : "");
}

LoadedSurface load_checked(const ExperimentConfig& cfg, const std::filesystem::path& base) {
    const std::string path = surface_path(base);
    if (!std::filesystem::exists(path)) {
        throw InputError("no surface checkpoint at '" + path + "'; run solve first");
    }
    LoadedSurface loaded = load_surface(path);
    const std::uint64_t expected = config_hash(cfg);
    if (loaded.config_hash != expected) {
        throw HashMismatchError("surface checkpoint '" + path +
                                "' was solved from a different configuration (hash mismatch); "
                                "re-run solve");
    }
    return loaded;
}

void print_summary(const ExperimentConfig& cfg, const SimStats& stats) {
    const auto& dates = stats.dates;
    const DateStats& last = dates.back();
    // Date closest to T/2 for the mid-horizon achievement rate.
    const double t_half = cfg.target.horizon / 2.0;
    const DateStats* half = &dates.front();
    for (const auto& d : dates) {
        if (std::abs(d.time - t_half) < std::abs(half->time - t_half)) half = &d;
    }
    const std::string floors =
        stats.floor_events > 0 ? " floors=" + std::to_string(stats.floor_events) : "";
    std::printf("%s: X_T=%.1f  A_half=%.0f%%  A_T=%.0f%%  P_T=%.1f  (paths=%ld %s seed=%llu%s)\n",
                cfg.name.c_str(), last.mean_wealth, 100.0 * half->achievement_rate,
                100.0 * last.achievement_rate, last.percentile_point, cfg.sim.path_count,
                to_string(cfg.sim.rebalance).c_str(),
                static_cast<unsigned long long>(cfg.sim.seed), floors.c_str());
}

void run_simulate(const ExperimentConfig& cfg, const CommonOpts& opts) {
    const auto base = out_base(cfg, opts);
    const LoadedSurface loaded = load_checked(cfg, base);
    const SimStats stats = simulate(cfg.market, cfg.target, loaded.surface, cfg.sim,
                                    opts.threads);
    atomic_write(base.string() + ".stats.csv", stats_to_csv(stats));
    atomic_write(base.string() + ".hist.csv", histogram_to_csv(stats.tracking_error));
    print_summary(cfg, stats);
}

void run_report(const ExperimentConfig& cfg, const CommonOpts& opts) {
    const auto base = out_base(cfg, opts);
    const std::string stats_path = base.string() + ".stats.csv";
    if (!std::filesystem::exists(stats_path)) {
        throw MissingSeriesError("no statistics at '" + stats_path + "'; run simulate first");
    }
    std::ifstream in(stats_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const StatsSeries series = parse_stats_csv(buf.str());

    std::string wealth = "# t mean_wealth target_f\n";
    std::string achievement = "# t achievement_rate\n";
    for (std::size_t i = 0; i < series.time.size(); ++i) {
        char line[128];
        std::snprintf(line, sizeof(line), "%.10g %.10g %.10g\n", series.time[i],
                      series.mean_wealth[i], series.target_level[i]);
        wealth += line;
        std::snprintf(line, sizeof(line), "%.10g %.10g\n", series.time[i],
                      series.achievement_rate[i]);
        achievement += line;
    }
    atomic_write(base.string() + ".wealth_curve.txt", wealth);
    atomic_write(base.string() + ".achievement_curve.txt", achievement);

    // Weight lattice: yearly time slices, wealth from 0 to just past x*.
    const LoadedSurface loaded = load_checked(cfg, base);
    std::vector<double> times;
    for (double t = 0.0; t < cfg.target.horizon - 1e-9; t += 1.0) times.push_back(t);
    std::vector<double> wealth_pts;
    for (double x = 0.0; x <= loaded.surface.xstar() + 1e-9; x += 1.0) wealth_pts.push_back(x);
    const WeightGrid grid = weight_grid(loaded.surface, cfg.market, times, wealth_pts);
    atomic_write(base.string() + ".weights.csv", weight_grid_to_csv(grid));
    std::printf("%s: wrote wealth_curve, achievement_curve, weights lattice (%zu x %zu)\n",
                cfg.name.c_str(), times.size(), wealth_pts.size());
}

void run_tables(const std::string& name, const CommonOpts& opts, std::optional<long> paths,
                std::optional<unsigned long long> seed) {
    if (name.empty()) {
        std::printf("available presets:\n");
        for (const auto& n : preset_names()) std::printf("  %s\n", n.c_str());
        return;
    }
    ExperimentConfig cfg = preset(name);
    if (paths) cfg.sim.path_count = *paths;
    if (seed) cfg.sim.seed = *seed;
    cfg.validate();
    const auto base = out_base(cfg, opts);
    if (!std::filesystem::exists(surface_path(base))) {
        run_solve(cfg, opts);
    }
    run_simulate(cfg, opts);
    run_report(cfg, opts);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained portfolio optimization: HJB collocation solver and simulator"};
    app.require_subcommand(1);

    CommonOpts solve_opts, sim_opts, report_opts, tables_opts;
    std::optional<long> paths_override;
    std::optional<unsigned long long> seed_override;
    std::string tables_preset;

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve the HJB equation to a checkpoint");
    add_common(solve_cmd, solve_opts);

    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "Monte Carlo evaluation of a solved policy");
    add_common(sim_cmd, sim_opts);
    sim_cmd->add_option("--paths", paths_override, "override simulation path count");
    sim_cmd->add_option("--seed", seed_override, "override simulation seed");

    CLI::App* report_cmd =
        app.add_subcommand("report", "emit plot-data series from simulation statistics");
    add_common(report_cmd, report_opts);

    CLI::App* tables_cmd =
        app.add_subcommand("tables", "run solve+simulate+report for a preset (no name: list)");
    tables_cmd->add_option("name", tables_preset, "preset name");
    add_common(tables_cmd, tables_opts, /*with_source=*/false);
    tables_cmd->add_option("--paths", paths_override, "override simulation path count");
    tables_cmd->add_option("--seed", seed_override, "override simulation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) {
            run_solve(resolve_config(solve_opts), solve_opts);
        } else if (sim_cmd->parsed()) {
            ExperimentConfig cfg = resolve_config(sim_opts);
            if (paths_override) cfg.sim.path_count = *paths_override;
            if (seed_override) cfg.sim.seed = *seed_override;
            cfg.validate();
            run_simulate(cfg, sim_opts);
        } else if (report_cmd->parsed()) {
            run_report(resolve_config(report_opts), report_opts);
        } else if (tables_cmd->parsed()) {
            run_tables(tables_preset, tables_opts, paths_override, seed_override);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitInvalidConfig;
    } catch (const BlowUpError& e) {
        std::fprintf(stderr, "numerical blow-up: %s\n", e.what());
        return kExitBlowUp;
    } catch (const HashMismatchError& e) {
        std::fprintf(stderr, "hash mismatch: %s\n", e.what());
        return kExitHashMismatch;
    } catch (const MissingSeriesError& e) {
        std::fprintf(stderr, "missing series: %s\n", e.what());
        return kExitMissingSeries;
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitOk;
}
