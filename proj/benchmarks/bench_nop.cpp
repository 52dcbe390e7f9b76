#include "condlab/mixture.hpp"
#include "condlab/nop/loss.hpp"
#include "condlab/nop/model.hpp"
#include "condlab/nop/train.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace condlab;
using namespace condlab::nop;

namespace {

struct Fixture {
    Grid2D grid;
    NOModel model;
    PairSet data;

    explicit Fixture(std::size_t n)
        : grid(make_grid(-6, 6, n, -6, 6, n)), model(ModelSpec::spectral(grid, 16, 8, 4, 32)), data{grid, {}, {}} {
        model.initialize(0);
        for (std::uint64_t k = 0; k < 16; ++k) {
            auto rng = CounterRng::stream(0, k);
            const auto r = render_pair(sample_params(1, ParamRanges{}, rng), grid);
            data.add({r.joint.values().begin(), r.joint.values().end()},
                     {r.kernel.values().begin(), r.kernel.values().end()});
        }
    }
};

Mat input_of(const PairSet& d) {
    Mat in(1, static_cast<Eigen::Index>(d.inputs[0].size()));
    std::copy(d.inputs[0].begin(), d.inputs[0].end(), in.data());
    return in;
}

void BM_Forward(benchmark::State& state) {
    const Fixture f(static_cast<std::size_t>(state.range(0)));
    const Mat in = input_of(f.data);
    for (auto _ : state) benchmark::DoNotOptimize(f.model.forward(in));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
    const Fixture f(static_cast<std::size_t>(state.range(0)));
    const Mat in = input_of(f.data);
    std::vector<double> grads(f.model.num_params());
    for (auto _ : state) {
        NOModel::Tape tape;
        const Mat out = f.model.forward(in, &tape);
        Mat d(1, out.cols());
        relative_l1_grad(f.grid, {out.data(), static_cast<std::size_t>(out.cols())}, f.data.targets[0], 1.0,
                         {d.data(), static_cast<std::size_t>(d.cols())});
        benchmark::DoNotOptimize(f.model.backward(tape, d, grads));
    }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BatchGradient(benchmark::State& state) {
    const Fixture f(32);
    std::vector<std::size_t> batch(16);
    std::iota(batch.begin(), batch.end(), 0);
    std::vector<double> grads(f.model.num_params());
    GradWorkspace ws;
    const auto threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(f.model, f.data, batch, grads, threads, ws));
}
BENCHMARK(BM_BatchGradient)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

} // namespace

BENCHMARK_MAIN();
