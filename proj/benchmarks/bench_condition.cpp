#include "condlab/condition.hpp"
#include "condlab/mixture.hpp"

#include <benchmark/benchmark.h>

using namespace condlab;

namespace {

GridDensity2D joint(std::size_t n) {
    auto rng = CounterRng::stream(0, 0);
    return render_joint(sample_params(3, ParamRanges{}, rng), make_grid(-6, 6, n, -6, 6, n));
}

void BM_KernelCondition(benchmark::State& state) {
    const auto rho = joint(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernel_condition(rho, 1e-300));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_KernelCondition)->Arg(32)->Arg(64)->Arg(256);

void BM_InContext(benchmark::State& state) {
    const auto rho = joint(64);
    for (auto _ : state) benchmark::DoNotOptimize(incontext_condition(rho, 0.123, 1e-300));
}
BENCHMARK(BM_InContext);

void BM_Mollify(benchmark::State& state) {
    const auto rho = joint(static_cast<std::size_t>(state.range(0)));
    const auto method = state.range(1) ? MollifyMethod::fft : MollifyMethod::direct;
    for (auto _ : state) benchmark::DoNotOptimize(mollify(rho, 0.05, method));
}
BENCHMARK(BM_Mollify)->ArgsProduct({{32, 64, 128}, {0, 1}})->ArgNames({"n", "fft"});

void BM_ExtensionLimit(benchmark::State& state) {
    const auto rho = joint(64);
    const auto schedule = MollifierSchedule::default_schedule();
    for (auto _ : state) benchmark::DoNotOptimize(extension_limit(rho, 0.5, schedule));
}
BENCHMARK(BM_ExtensionLimit);

void BM_RenderPair(benchmark::State& state) {
    auto rng = CounterRng::stream(0, 1);
    const auto p = sample_params(3, ParamRanges{}, rng);
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    for (auto _ : state) benchmark::DoNotOptimize(render_pair(p, g));
}
BENCHMARK(BM_RenderPair);

} // namespace

BENCHMARK_MAIN();
