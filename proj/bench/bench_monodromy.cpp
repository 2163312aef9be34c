// Serial reference against the OpenMP loop-parallel monodromy computation.
#include "fuchsian/monodromy.hpp"

#include <benchmark/benchmark.h>

using namespace fuchsian;

namespace {

FuchsianSystem sample(int n, int m) {
    std::vector<cplx> u;
    std::vector<Mat> a;
    Mat sum = Mat::Zero(m, m);
    for (int k = 0; k < n - 1; ++k) {
        u.push_back(std::polar(1.0 + k, 0.7 * k));
        Mat r = Mat::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) r(i, j) = cplx(0.05 * ((3 * i + 5 * j + 7 * k) % 7) - 0.15, 0.02 * (i - j));
        a.push_back(r);
        sum += r;
    }
    u.push_back(cplx(-1.3, -0.9));
    Mat inf = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) inf(i, i) = 0.13 * (i + 1) - 0.2 * i * i;
    a.push_back(-inf - sum);
    return build_system(u, a);
}

void run(benchmark::State& st, bool parallel) {
    const auto sys = sample(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    ToleranceConfig tol;
    tol.ode_rel_tol = 1e-10;
    tol.ode_abs_tol = 1e-12;
    for (auto _ : st) {
        auto d = parallel ? monodromy_matrices(sys, {}, tol) : monodromy_matrices_serial(sys, {}, tol);
        benchmark::DoNotOptimize(d.closure_residual);
    }
}

void BM_serial(benchmark::State& st) { run(st, false); }
void BM_parallel(benchmark::State& st) { run(st, true); }

}  // namespace

BENCHMARK(BM_serial)->Args({3, 2})->Args({4, 2})->Args({4, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel)->Args({3, 2})->Args({4, 2})->Args({4, 3})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
