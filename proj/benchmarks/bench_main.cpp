#include <benchmark/benchmark.h>

#include "dsnls/integrator.hpp"
#include "dsnls/noise.hpp"

namespace {

using namespace dsnls;

void BM_Step(benchmark::State& state) {
  const Grid grid(static_cast<int>(state.range(0)));
  const LinearPropagator prop(grid, 1.0 / 64.0, 0.5);
  const NoiseSpec noise(spectrum(SpectrumDescriptor::power_law(6.0), 100), 1);
  const ForcingOperator forcing_op(grid, noise, 1.0);
  const IncrementStream stream(1, 0, noise.modes, prop.tau());
  Stepper stepper(prop, ModelParams{0.5, 1, 1.0});
  State psi = sample_initial(grid, InitialProfile::sine());
  ComplexVector dbeta(100);
  ComplexVector g(psi.size());
  std::size_t n = 0;
  for (auto _ : state) {
    stream.fill(n++, dbeta);
    forcing_op.apply(dbeta, g);
    stepper.advance(psi, g);
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Step)->Arg(9)->Arg(63)->Arg(1023);

void BM_Solve(benchmark::State& state) {
  const Grid grid(static_cast<int>(state.range(0)));
  const LinearPropagator prop(grid, 1.0 / 64.0, 0.5);
  ComplexVector x(static_cast<std::size_t>(grid.size()), Complex{1.0, -0.5});
  ComplexVector y(x.size());
  for (auto _ : state) {
    prop.propagate(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Solve)->Arg(9)->Arg(1023);

void BM_GeneratePath(benchmark::State& state) {
  const NoiseSpec noise(spectrum(SpectrumDescriptor::power_law(6.0), static_cast<int>(state.range(0))), 7);
  for (auto _ : state) {
    auto path = generate_path(noise, 1.0 / 4096.0, 4096, 0);
    benchmark::DoNotOptimize(path.increment(0).data());
  }
  state.SetItemsProcessed(state.iterations() * 4096 * state.range(0));
}
BENCHMARK(BM_GeneratePath)->Arg(100);

void BM_Coarsen(benchmark::State& state) {
  const NoiseSpec noise(spectrum(SpectrumDescriptor::power_law(6.0), 100), 7);
  const auto path = generate_path(noise, 1.0 / 4096.0, 4096, 0);
  for (auto _ : state) {
    auto coarse = coarsen(path, static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(coarse.increment(0).data());
  }
}
BENCHMARK(BM_Coarsen)->Arg(4)->Arg(32);

}  // namespace
BENCHMARK_MAIN();
