#include <benchmark/benchmark.h>

#include "nhring/dynamics.hpp"
#include "nhring/lz_analysis.hpp"
#include "nhring/spectrum.hpp"

namespace {

using namespace nhring;

void BM_Eigensolve(benchmark::State& state) {
  const int half = static_cast<int>(state.range(0));
  const auto h = build_hamiltonian(make_reference_potential(0.08, 0.3), 0.25, ModeWindow(-half, half));
  for (auto _ : state) benchmark::DoNotOptimize(eigensolve(h));
  state.SetComplexityN(2 * half + 1);
}
BENCHMARK(BM_Eigensolve)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_EigensolveTriangular(benchmark::State& state) {
  const auto h = build_hamiltonian(make_reference_potential(0.02, 1.0), 0.25, ModeWindow(-16, 16));
  for (auto _ : state) benchmark::DoNotOptimize(eigensolve(h));
}
BENCHMARK(BM_EigensolveTriangular);

void BM_BandSweep(benchmark::State& state) {
  const auto p = make_reference_potential(0.08, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(band_sweep(p, ModeWindow(-16, 16), 101));
}
BENCHMARK(BM_BandSweep)->Unit(benchmark::kMillisecond);

void BM_Evolve(benchmark::State& state) {
  const auto p = make_reference_potential(0.08, 0.3);
  const auto flux = FluxProgram::ramp(0.003);
  const ModeWindow w(-6, 12);
  const auto init = WaveState::delta(w, 0);
  const double span = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evolve(p, flux, w, init, {0.0, span}, {}, 50));
}
BENCHMARK(BM_Evolve)->Arg(250)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_TwoLevelLz(benchmark::State& state) {
  const double sigma = 0.003;
  for (auto _ : state) {
    benchmark::DoNotOptimize(two_level_lz(0.08, 0.08, 0, sigma, crossing_span(0, sigma, 200.0)));
  }
}
BENCHMARK(BM_TwoLevelLz)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
