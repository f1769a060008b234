// Microbenchmarks for the hot paths: fixed-point solves, cascade stepping,
// and the layered exact-law propagation.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "netrisk/cascade.hpp"
#include "netrisk/exactdist.hpp"
#include "netrisk/meanfield.hpp"
#include "netrisk/network.hpp"
#include "netrisk/synthgen.hpp"

namespace {

netrisk::ContractorNetwork make_net(int n, int depth) {
  netrisk::GeneratorSpec spec;
  spec.n = n;
  spec.frac_principal = 0.25;
  spec.frac_intermediary = 0.05;
  spec.depth = depth;
  return netrisk::generate_random_network(spec, 42);
}

void bm_solve_direct(benchmark::State& state) {
  auto net = make_net(static_cast<int>(state.range(0)), 6);
  netrisk::SolverConfig cfg;
  cfg.method = netrisk::SolveMethod::DirectSolve;
  for (auto _ : state)
    benchmark::DoNotOptimize(netrisk::solve_fixed_point(net, cfg).m);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_solve_direct)->Range(256, 16384)->Complexity();

void bm_solve_neumann(benchmark::State& state) {
  auto net = make_net(static_cast<int>(state.range(0)), 6);
  netrisk::SolverConfig cfg;
  cfg.method = netrisk::SolveMethod::NeumannIteration;
  for (auto _ : state)
    benchmark::DoNotOptimize(netrisk::solve_fixed_point(net, cfg).m);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_solve_neumann)->Range(256, 16384)->Complexity();

void bm_cascade_step(benchmark::State& state) {
  auto net = make_net(static_cast<int>(state.range(0)), 6);
  const int n = net.n();
  netrisk::StateVector x(static_cast<size_t>(n), 0);
  std::vector<double> uniforms(static_cast<size_t>(n));
  std::mt19937_64 gen(7);
  for (auto& u : uniforms)
    u = std::generate_canonical<double, 53>(gen);
  for (auto _ : state) {
    x = netrisk::step(net, x, uniforms);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_cascade_step)->Range(256, 65536);

void bm_trajectory(benchmark::State& state) {
  auto net = make_net(4096, 6);
  netrisk::SimulationConfig cfg;
  cfg.horizon = 6;
  std::uint64_t rep = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(netrisk::simulate_trajectory(net, cfg, rep++));
}
BENCHMARK(bm_trajectory);

void bm_dag_stationary(benchmark::State& state) {
  netrisk::GeneratorSpec spec;
  spec.n = static_cast<int>(state.range(0));
  spec.frac_principal = 0.25;
  spec.frac_intermediary = 0.4;
  spec.depth = 3;
  auto net = netrisk::generate_random_network(spec, 42);
  for (auto _ : state)
    benchmark::DoNotOptimize(netrisk::dag_stationary(net).p);
}
BENCHMARK(bm_dag_stationary)->DenseRange(8, 16, 4);

}  // namespace

BENCHMARK_MAIN();
