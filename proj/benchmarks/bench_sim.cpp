#include <benchmark/benchmark.h>

#include <hjbport/config.hpp>
#include <hjbport/hjb.hpp>
#include <hjbport/sim.hpp>

using namespace hjbport;

namespace {

const SolveResult& solved() {
    static const SolveResult result = [] {
        ExperimentConfig cfg = preset("margin-00bp");
        cfg.target.horizon = 2.0;
        cfg.grid.time_steps = 1200;
        return solve_hjb(cfg.market, cfg.target, cfg.grid, 50, 1);
    }();
    return result;
}

void BM_Simulate(benchmark::State& state) {
    ExperimentConfig cfg = preset("margin-00bp");
    cfg.target.horizon = 2.0;
    cfg.grid.time_steps = 1200;
    cfg.sim.path_count = state.range(0);
    const SolveResult& sol = solved();
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(cfg.market, cfg.target, sol.surface, cfg.sim, 1));
    }
    state.SetItemsProcessed(state.iterations() * cfg.sim.path_count);
}

}  // namespace

BENCHMARK(BM_Simulate)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
