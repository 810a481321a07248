#include <benchmark/benchmark.h>

#include <hjbport/rbf.hpp>
#include <random>

using namespace hjbport;

namespace {

Eigen::VectorXd grid_centers(int n, double h) {
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = h * i;
    return c;
}

Eigen::VectorXd random_values(int n) {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> unif(0.0, 100.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = unif(gen);
    return v;
}

void BM_BasisFactorization(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        RbfBasis basis(grid_centers(n, 0.5), 0.25);
        benchmark::DoNotOptimize(basis.condition_estimate());
    }
}

void BM_FitCoefficients(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const RbfBasis basis(grid_centers(n, 0.5), 0.25);
    const Eigen::VectorXd values = random_values(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(basis.fit_coefficients(values));
    }
}

void BM_EvalAll(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Interpolant interp =
        fit_interpolant(grid_centers(n, 0.5), random_values(n), 0.25);
    double x = 0.0;
    for (auto _ : state) {
        double v, d1, d2;
        interp.eval_all(x, v, d1, d2);
        benchmark::DoNotOptimize(v + d1 + d2);
        x += 0.31;
        if (x > 0.5 * n) x = 0.0;
    }
}

}  // namespace

BENCHMARK(BM_BasisFactorization)->Arg(64)->Arg(226);
BENCHMARK(BM_FitCoefficients)->Arg(64)->Arg(226);
BENCHMARK(BM_EvalAll)->Arg(64)->Arg(226);
