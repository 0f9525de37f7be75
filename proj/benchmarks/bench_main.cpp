#include <benchmark/benchmark.h>

#include "alexot/dmae.hpp"
#include "alexot/energy.hpp"
#include "alexot/oracle.hpp"
#include "alexot/solver.hpp"
#include "support.hpp"

namespace {

using namespace alexot;

void BM_BuildDiagram(benchmark::State& state) {
  const auto in = testing::random_ot(static_cast<std::size_t>(state.range(0)), 1);
  const SiteSet s{in.points, feasible_heights(in.points, in.domain)};
  for (auto _ : state) benchmark::DoNotOptimize(build_diagram(s, in.domain));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildDiagram)->RangeMultiplier(2)->Range(16, 512)->Complexity();

void BM_EnergyAndHessian(benchmark::State& state) {
  const auto in = testing::random_ot(static_cast<std::size_t>(state.range(0)), 2, Density::affine(0.5, -0.3, 1.2));
  const SiteSet s{in.points, feasible_heights(in.points, in.domain)};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_energy(s, in.domain, in.sigma, in.targets));
}
BENCHMARK(BM_EnergyAndHessian)->Arg(16)->Arg(64)->Arg(256);

void BM_SolveOt(benchmark::State& state) {
  const auto in = testing::random_ot(static_cast<std::size_t>(state.range(0)), 3);
  int iters = 0;
  for (auto _ : state) iters = solve_ot(in.points, in.domain, in.sigma, in.targets).iterations;
  state.counters["newton_iters"] = iters;
}
BENCHMARK(BM_SolveOt)->Arg(10)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SolveDmae(benchmark::State& state) {
  const DmaeProblem p = testing::random_dmae(8, static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(solve_dmae(p));
}
BENCHMARK(BM_SolveDmae)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_GridLp(benchmark::State& state) {
  const auto in = testing::random_ot(10, 5);
  const auto g = oracle::discretize(in.domain, in.sigma, static_cast<int>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::lp_transport_cost(g, in.points, in.targets));
}
BENCHMARK(BM_GridLp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
