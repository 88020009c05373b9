// Serial reference vs OpenMP batch, plus the per-packet kernels on their own.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "evmarker/pipeline.hpp"
#include "evmarker/simulator.hpp"

using namespace evm;

namespace {

// Noisy sweeps of four markers in all four directions at 1 and 2 px/ms.
const std::vector<EventPacket>& suite_packets() {
    static const std::vector<EventPacket> packets = [] {
        SuiteOptions opts;
        opts.noise_fraction = 0.05;
        opts.timestamp_jitter_us = 200;
        std::vector<EventPacket> out;
        for (int id : {0, 5, 10, 15})
            for (Point2 d : {Point2{1, 0}, Point2{-1, 0}, Point2{0, 1}, Point2{0, -1}})
                for (double v : {1.0, 2.0}) {
                    const SimConfig sc = sweep_config(id, d, v, opts);
                    auto p = packetize(simulate(sc).events, 10000, sc.geometry);
                    out.insert(out.end(), p.begin(), p.end());
                }
        return out;
    }();
    return packets;
}

void BM_DetectSerial(benchmark::State& state) {
    const auto& packets = suite_packets();
    const PipelineConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(detect_packets(packets, cfg, builtin_dictionary(), false));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(packets.size()));
}
BENCHMARK(BM_DetectSerial)->Unit(benchmark::kMillisecond);

void BM_DetectParallel(benchmark::State& state) {
    const auto& packets = suite_packets();
    const PipelineConfig cfg;
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(detect_packets(packets, cfg, builtin_dictionary(), true));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(packets.size()));
}
BENCHMARK(BM_DetectParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

const EventPacket& busy_packet() {
    const auto& p = suite_packets();
    static const EventPacket* best = [&] {
        const EventPacket* b = &p.front();
        for (const auto& q : p)
            if (q.events.size() > b->events.size()) b = &q;
        return b;
    }();
    return *best;
}

void BM_NoiseFilter(benchmark::State& state) {
    const EventPacket& p = busy_packet();
    for (auto _ : state) benchmark::DoNotOptimize(noise_filter(p));
}
BENCHMARK(BM_NoiseFilter)->Unit(benchmark::kMicrosecond);

void BM_EventImage(benchmark::State& state) {
    const EventPacket p = noise_filter(busy_packet());
    const GaussianKernel k = GaussianKernel::make(3, 0.8);
    for (auto _ : state) {
        const NormImage n = normalize(build_time_image(p, Polarity::On), true);
        benchmark::DoNotOptimize(smooth(refine(n), k));
    }
}
BENCHMARK(BM_EventImage)->Unit(benchmark::kMicrosecond);

void BM_Segments(benchmark::State& state) {
    const EventPacket p = noise_filter(busy_packet());
    const NormImage n = normalize(build_time_image(p, Polarity::On), true);
    const SmoothImage s = smooth(refine(n), GaussianKernel::make(3, 0.8));
    for (auto _ : state) benchmark::DoNotOptimize(detect_segments(s, 25.0, Polarity::On));
}
BENCHMARK(BM_Segments)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
