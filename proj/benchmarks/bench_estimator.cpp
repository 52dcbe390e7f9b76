#include "condlab/estimator.hpp"
#include "condlab/mixture.hpp"

#include <benchmark/benchmark.h>

using namespace condlab;

namespace {

void BM_KdeDensity(benchmark::State& state) {
    auto rng = CounterRng::stream(1, 0);
    const auto p = sample_params(1, ParamRanges{}, rng);
    const auto spec = KdeSpec::silverman(sample_points(p, static_cast<std::size_t>(state.range(0)), rng));
    const auto n = static_cast<std::size_t>(state.range(1));
    const auto g = make_grid(-6, 6, n, -6, 6, n);
    for (auto _ : state) benchmark::DoNotOptimize(kde_density(spec, g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdeDensity)->ArgsProduct({{500, 2000, 20000}, {32, 64}})->ArgNames({"samples", "n"});

void BM_PluginConditional(benchmark::State& state) {
    auto rng = CounterRng::stream(1, 1);
    const auto p = sample_params(1, ParamRanges{}, rng);
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    const auto rho = kde_density(KdeSpec::silverman(sample_points(p, 2000, rng)), g);
    for (auto _ : state) benchmark::DoNotOptimize(plugin_conditional(rho));
}
BENCHMARK(BM_PluginConditional);

} // namespace

BENCHMARK_MAIN();
