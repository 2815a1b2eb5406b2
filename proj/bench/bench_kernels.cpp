// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <vector>

#include <benchmark/benchmark.h>

#include "homqd/fringe.hpp"
#include "homqd/kernels.hpp"
#include "homqd/spectrum.hpp"

namespace {

using namespace homqd;

template <bool Parallel>
void BM_CoincidenceMap(benchmark::State& state) {
    BiphotonSpectrumModel model;
    const FrequencyGrid grid = FrequencyGrid::for_model(model, static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(grid.n_points * grid.n_points);
    const kernels::CoincidenceMapArgs args{model, grid, 0.37, out};
    for (auto _ : state) {
        if constexpr (Parallel) kernels::omp::coincidence_map(args);
        else kernels::serial::coincidence_map(args);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(out.size()));
}

template <bool Parallel>
void BM_CascadedFringe(benchmark::State& state) {
    BiphotonSpectrumModel model;
    const JointQuadrature quad(model);
    const kernels::DetuningNodes nodes{quad.detuning(), quad.weights(), model.degenerate_frequency()};
    std::vector<double> tau2(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < tau2.size(); ++i) {
        tau2[i] = -0.8 + 1.6 * static_cast<double>(i) / static_cast<double>(tau2.size() - 1);
    }
    std::vector<double> out(tau2.size());
    const kernels::CascadedFringeArgs args{nodes, 0.37, tau2, out};
    for (auto _ : state) {
        if constexpr (Parallel) kernels::omp::cascaded_fringe(args);
        else kernels::serial::cascaded_fringe(args);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(out.size()));
}

template <Backend B>
void BM_RecoveryBatch(benchmark::State& state) {
    RecoveryJob job;
    job.truth.coherence_time_ps = 0.94;
    job.truth.pairs = {{0.44, 5.71, 0.80, 180.03}, {0.56, 1.94, 0.86, 182.14}};
    job.tau2_min_ps = -0.564;
    job.tau2_max_ps = 0.564;
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_recovery_batch(job, seeds, B));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CoincidenceMap<false>)->Name("coincidence_map/serial")->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoincidenceMap<true>)->Name("coincidence_map/omp")->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CascadedFringe<false>)->Name("cascaded_fringe/serial")->Arg(401)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CascadedFringe<true>)->Name("cascaded_fringe/omp")->Arg(401)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RecoveryBatch<Backend::serial>)->Name("recovery_batch/serial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RecoveryBatch<Backend::openmp>)->Name("recovery_batch/omp")->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
