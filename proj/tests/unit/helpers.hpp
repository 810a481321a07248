#pragma once

#include <hjbport/config.hpp>
#include <hjbport/hjb.hpp>
#include <hjbport/market.hpp>

namespace testutil {

// Two-asset market with a strongly hedging pair, as in the shipped
// artificial presets but usable standalone in tests.
inline hjbport::MarketParams small_market(double cap) {
    hjbport::MarketParams m;
    m.risk_free = 1e-4;
    m.drift = Eigen::Vector2d(0.01, 0.05);
    m.covariance = Eigen::Matrix2d{{1e-4, -6e-4}, {-6e-4, 4e-2}};
    m.leverage_cap = cap;
    return m;
}

inline hjbport::TargetSpec small_target(double horizon, double required, double margin,
                                        double x0) {
    hjbport::TargetSpec t;
    t.variant = hjbport::TargetVariant::Affine;
    t.horizon = horizon;
    t.initial_wealth = x0;
    t.required_return = required;
    t.margin_rate = margin;
    return t;
}

// Small 2-year experiment at the shipped presets' wealth scale and node
// spacing (the terminal kink needs that resolution or the march leaves
// visible interpolation ripple). About 210 nodes, 1200 time steps, monthly
// rebalance; cheap enough that several suites can solve it independently.
inline hjbport::ExperimentConfig tiny_config() {
    hjbport::ExperimentConfig cfg;
    cfg.name = "tiny";
    cfg.market = small_market(1.0);
    cfg.target = small_target(2.0, 0.01, 0.0, 100.0);
    cfg.grid.h_x = 0.5;
    cfg.grid.extra_nodes = 5;
    cfg.grid.time_steps = 1200;
    cfg.sim.path_count = 2000;
    cfg.sim.rebalance = hjbport::Rebalance::Monthly;
    cfg.sim.seed = 777;
    return cfg;
}

// Shared solved surface for the tiny config; solved once per process.
inline const hjbport::SolveResult& tiny_solution() {
    static const hjbport::SolveResult result = [] {
        const hjbport::ExperimentConfig cfg = tiny_config();
        return hjbport::solve_hjb(cfg.market, cfg.target, cfg.grid, cfg.store_stride(), 1);
    }();
    return result;
}

}  // namespace testutil
