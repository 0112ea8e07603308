// OpenMP kernels against their serial twins. Run with --benchmark_filter to
// pick a kernel; OMP_NUM_THREADS sets the pool size.

#include "stk/kernels.hpp"
#include "stk/models.hpp"

#include <benchmark/benchmark.h>

using namespace stk;

namespace {

template <bool Parallel>
void assign(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const Matrix pts = gen_gaussian(10, n, 1);
    const Matrix centers = gen_gaussian(10, 8, 2);
    std::vector<int> labels;
    Vector d2;
    for (auto _ : state) {
        const double inertia = Parallel ? assign_nearest(pts, centers, labels, d2)
                                        : assign_nearest_serial(pts, centers, labels, d2);
        benchmark::DoNotOptimize(inertia);
    }
    state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void norms(benchmark::State& state)
{
    const Matrix a = gen_gaussian(static_cast<int>(state.range(0)), 64, 3);
    for (auto _ : state) {
        Vector out = Parallel ? row_norms(a) : row_norms_serial(a);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void varphi(benchmark::State& state)
{
    const LinearizationSpectrum spec = LinearizationSpectrum::values_only(gen_gaussian(300, 300, 4));
    std::vector<double> xs;
    for (int i = 0; i < state.range(0); ++i)
        xs.push_back(spec.noise_norm() * (1.5 + 0.01 * i));
    for (auto _ : state) {
        auto out = Parallel ? varphi_grid(spec, xs) : varphi_grid_serial(spec, xs);
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(assign<true>)->Name("assign_nearest/omp")->Arg(10000)->Arg(100000);
BENCHMARK(assign<false>)->Name("assign_nearest/serial")->Arg(10000)->Arg(100000);
BENCHMARK(norms<true>)->Name("row_norms/omp")->Arg(10000)->Arg(100000);
BENCHMARK(norms<false>)->Name("row_norms/serial")->Arg(10000)->Arg(100000);
BENCHMARK(varphi<true>)->Name("varphi_grid/omp")->Arg(50)->Arg(1000);
BENCHMARK(varphi<false>)->Name("varphi_grid/serial")->Arg(50)->Arg(1000);

BENCHMARK_MAIN();
