#include <benchmark/benchmark.h>

#include <hjbport/qp.hpp>
#include <random>
#include <vector>

using namespace hjbport;

namespace {

std::vector<QpProblem> random_problems(int m, int count) {
    std::mt19937 gen(7);
    std::normal_distribution<double> gauss(0.0, 0.6);
    std::uniform_real_distribution<double> unif(-1.2, 1.2);
    std::vector<QpProblem> out(count);
    for (auto& p : out) {
        Eigen::MatrixXd a(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) a(r, c) = gauss(gen);
        p.quadratic = a.transpose() * a;
        p.linear.resize(m);
        for (int r = 0; r < m; ++r) p.linear[r] = unif(gen);
        p.cap = 1.0;
    }
    return out;
}

void BM_SolveQp(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const std::vector<QpProblem> problems = random_problems(m, 512);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_qp(problems[i]));
        i = (i + 1) % problems.size();
    }
}

}  // namespace

BENCHMARK(BM_SolveQp)->Arg(2)->Arg(4)->Arg(8);
