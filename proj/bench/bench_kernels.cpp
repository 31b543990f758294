#include <benchmark/benchmark.h>

#include <cmath>

#include "oscillant/catalog.hpp"
#include "oscillant/flow.hpp"
#include "oscillant/interaction.hpp"
#include "oscillant/simulator.hpp"

using namespace osc;

namespace {

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_SpectralField(benchmark::State& state) {
  CatalogSystem c = build_catalog_system("kg-equal");
  for (auto _ : state) benchmark::DoNotOptimize(eigendecompose_field(c.spec, -20.0, 20.0, 2048, mode(state)));
}
BENCHMARK(BM_SpectralField)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_InteractionCoefficients(benchmark::State& state) {
  CatalogSystem c = build_catalog_system("kg-equal");
  VecR lo = VecR::Constant(1, -20.0), hi = VecR::Constant(1, 20.0);
  SpectralField f = resonance_field(c.spec, c.phase, lo, hi, 2048);
  PolarizationVectors pol = polarization_vectors(c.spec, c.phase);
  std::vector<VecR> grid;
  for (double x : linspace(-15.0, 15.0, 4096)) grid.push_back(VecR::Constant(1, x));
  for (auto _ : state) benchmark::DoNotOptimize(interaction_coefficients(f, pol, c.phase, 4, 3, grid, mode(state)));
}
BENCHMARK(BM_InteractionCoefficients)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimulatorStep(benchmark::State& state) {
  CatalogSystem c = build_catalog_system("kg-equal");
  Simulator sim(c.spec, 1e-3, 4096, 160.0, mode(state));
  std::vector<VecC> u(4096, VecC::Zero(6));
  for (int j = 0; j < 4096; ++j) u[j](1) = std::exp(-sim.x(j) * sim.x(j) / 16.0);
  sim.set_state(u);
  for (auto _ : state) sim.step(1e-4);
}
BENCHMARK(BM_SimulatorStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ThreeWaveRun(benchmark::State& state) {
  CatalogSystem c = build_catalog_system("three-wave", {{"b1", 0.0}});
  SimConfig cfg;
  cfg.spec = c.spec;
  cfg.phase = c.phase;
  cfg.e1 = *c.e_bar;
  cfg.em1 = *c.e_bar;
  cfg.e0 = VecC::Unit(3, 2);
  cfg.epsilon = 1e-2;
  cfg.t_end = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(run_instability_experiment(cfg, mode(state)));
}
BENCHMARK(BM_ThreeWaveRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
