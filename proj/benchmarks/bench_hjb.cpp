#include <benchmark/benchmark.h>

#include <hjbport/config.hpp>
#include <hjbport/hjb.hpp>

using namespace hjbport;

namespace {

// Per-step cost of the solver inner loop: fit, differentiate, per-node QP.
void BM_HamiltonianSweep(benchmark::State& state) {
    const ExperimentConfig cfg = preset("margin-00bp");
    const Eigen::VectorXd nodes = build_nodes(cfg.target, cfg.grid);
    const RbfBasis basis(nodes, cfg.grid.shape_factor * cfg.grid.h_x);
    const Eigen::VectorXd values = terminal_values(cfg.target, nodes);
    const Eigen::VectorXd coeffs = basis.fit_coefficients(values);
    const Eigen::VectorXd d1 = basis.derivative_matrix_1() * coeffs;
    const Eigen::VectorXd d2 = basis.derivative_matrix_2() * coeffs;
    long clamps = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hamiltonian_nodes(cfg.market, cfg.target, nodes, d1, d2,
                                                   cfg.target.horizon * 0.5, &clamps, nullptr));
    }
}

// Whole backward march on a shortened horizon at production spacing.
void BM_SolveShortHorizon(benchmark::State& state) {
    ExperimentConfig cfg = preset("margin-00bp");
    cfg.target.horizon = 1.0;
    cfg.grid.time_steps = 600;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_hjb(cfg.market, cfg.target, cfg.grid, 0, 1));
    }
}

}  // namespace

BENCHMARK(BM_HamiltonianSweep);
BENCHMARK(BM_SolveShortHorizon)->Unit(benchmark::kMillisecond);
