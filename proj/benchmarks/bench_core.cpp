#include <benchmark/benchmark.h>

#include "see/feasible_zone.hpp"
#include "see/pruning.hpp"
#include "see/see_driver.hpp"

namespace {

using namespace see;

const DiscreteSystem& double_integrator() {
    static const DiscreteSystem sys = DiscreteSystem::double_integrator();
    return sys;
}

void BM_HorizonWorklist(benchmark::State& state) {
    const auto& sys = double_integrator();
    const auto model = build_initial_model(sys, {static_cast<double>(state.range(0)), 2.0, 1.0, true});
    for (auto _ : state) benchmark::DoNotOptimize(horizon_iteration(model, sys));
}
BENCHMARK(BM_HorizonWorklist)->Arg(1)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_HorizonSweeps(benchmark::State& state) {
    const auto& sys = double_integrator();
    const auto model = build_initial_model(sys, {2.0, 2.0, 1.0, true});
    for (auto _ : state) benchmark::DoNotOptimize(horizon_iteration_sweeps(model, sys));
}
BENCHMARK(BM_HorizonSweeps)->Unit(benchmark::kMillisecond);

// First pruning pass of the default double integrator run.
void BM_PruneFirstPass(benchmark::State& state) {
    const auto& sys = double_integrator();
    const auto initial = build_initial_model(sys, {2.0, 2.0, 1.0, true});
    const auto zone = extract_zone(horizon_iteration(initial, sys), sys);
    const auto collapsed = collapse_known(initial, zone, sys);
    PruneOptions opts;
    opts.threads = static_cast<unsigned>(state.range(0));
    opts.distance_cache = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(prune_second_kind(collapsed, zone, sys, {1.735, {}, {}}, opts));
}
BENCHMARK(BM_PruneFirstPass)->Args({1, 1})->Args({1, 0})->Args({4, 1})->Unit(benchmark::kMillisecond);

void BM_FullRun(benchmark::State& state) {
    const auto& sys = double_integrator();
    RunOptions o;
    o.initial = {2.0, 2.0, 1.0, true};
    o.lipschitz = {1.735, {}, {}};
    o.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_see(sys, o));
}
BENCHMARK(BM_FullRun)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
