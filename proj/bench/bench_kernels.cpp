#include <benchmark/benchmark.h>

#include <cmath>

#include "fracgeo/kernels.hpp"

using namespace fracgeo;

namespace {

GridFunction test_field(std::size_t lines, std::size_t n) {
  const TensorGrid tg({Grid1D::uniform(0.0, 1.0, lines), Grid1D::uniform(0.0, 1.0, n)});
  return GridFunction::sample(tg, [](std::span<const double> u) { return std::sin(3 * u[0] + u[1]) + u[1] * u[1]; });
}

template <class Fn>
void run(benchmark::State& state, Fn fn, LineOp op) {
  const GridFunction f = test_field(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto out = fn(f.values(), f.grid(), 1, op, 0.5);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(f.size()));
}

void BM_caputo_parallel(benchmark::State& s) { run(s, kernels::apply_along_axis, LineOp::caputo_left); }
void BM_caputo_serial(benchmark::State& s) { run(s, reference::apply_along_axis, LineOp::caputo_left); }
void BM_rl_parallel(benchmark::State& s) { run(s, kernels::apply_along_axis, LineOp::rl_integral); }
void BM_rl_serial(benchmark::State& s) { run(s, reference::apply_along_axis, LineOp::rl_integral); }

}  // namespace

BENCHMARK(BM_caputo_parallel)->Args({1, 4096})->Args({64, 512})->Args({289, 65});
BENCHMARK(BM_caputo_serial)->Args({1, 4096})->Args({64, 512})->Args({289, 65});
BENCHMARK(BM_rl_parallel)->Args({1, 4096})->Args({64, 512});
BENCHMARK(BM_rl_serial)->Args({1, 4096})->Args({64, 512});

BENCHMARK_MAIN();
