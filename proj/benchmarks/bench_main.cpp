#include <benchmark/benchmark.h>

#include <random>

#include "incmart/finite_space.hpp"
#include "incmart/integration.hpp"
#include "incmart/quadvar.hpp"
#include "incmart/stats_mc.hpp"

using namespace incmart;

namespace {

void BM_SampleLevy(benchmark::State& state) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-10, 10, static_cast<std::size_t>(state.range(0))));
  const Sampler sampler(LevyR{0.0, 1.0, 2.0}, grid);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler(++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleLevy)->Arg(1000)->Arg(16384);

void BM_SampleHazard(benchmark::State& state) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-20, 5, 250));
  const Sampler sampler(HazardPair{}, grid);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler(++seed));
}
BENCHMARK(BM_SampleHazard);

void BM_RealizedQv(benchmark::State& state) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 1, static_cast<std::size_t>(state.range(0))));
  const SamplePath path = sample(BrownianR{}, grid, 1).path;
  for (auto _ : state) benchmark::DoNotOptimize(realized_qv(path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RealizedQv)->Arg(1024)->Arg(16384);

void BM_ImproperIntegral(benchmark::State& state) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-40, 0, 4000));
  const SamplePath path = sample(BrownianR{}, grid, 1).path;
  const Integrand phi = Integrand::parse("exp(1)");
  for (auto _ : state) benchmark::DoNotOptimize(improper_integral(phi, path));
}
BENCHMARK(BM_ImproperIntegral);

void BM_IntegralPropertiesExact(benchmark::State& state) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-5, 5, 500));
  const SamplePath path = sample(LevyR{0.0, 1.0, 2.0}, grid, 1).path;
  const Integrand phi = Integrand::parse("exp(0.5)");
  const Integrand psi = Integrand::parse("const(2)");
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_integral_properties(phi, psi, path, GridStop{250}, 100));
  }
}
BENCHMARK(BM_IntegralPropertiesExact);

void BM_Decompose(benchmark::State& state) {
  const auto depth = static_cast<std::size_t>(state.range(0));
  std::vector<double> times(depth + 1);
  for (std::size_t i = 0; i <= depth; ++i) times[i] = static_cast<double>(i);
  const auto space = FiniteFilteredSpace::binary_tree(depth, times, [](std::size_t, std::size_t) { return 0.5; });
  FiniteProcess m(depth + 1, space.outcomes());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t w = 0; w < space.outcomes(); ++w) {
    const double z = g(rng);
    for (std::size_t k = 1; k <= depth; ++k) {
      m.at(k, w) = m.at(k - 1, w) + (((w >> (depth - k)) & 1U) ? 1.0 : -1.0);
    }
    for (std::size_t k = 0; k <= depth; ++k) m.at(k, w) += z;
  }
  for (auto _ : state) benchmark::DoNotOptimize(decompose(space, m));
}
BENCHMARK(BM_Decompose)->Arg(8)->Arg(12);

void BM_MartingaleTest(benchmark::State& state) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 2, 200));
  const auto paths = run_ensemble(BrownianR{}, grid, 10000, 1).paths();
  for (auto _ : state) {
    benchmark::DoNotOptimize(martingale_test(paths, 0.5, 1.5, value_feature(), 5));
  }
}
BENCHMARK(BM_MartingaleTest);

}  // namespace

BENCHMARK_MAIN();
