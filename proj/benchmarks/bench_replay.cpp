#include "coldrl/policies.hpp"
#include "coldrl/sim.hpp"
#include "coldrl/workload.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_ReplayLru(benchmark::State& state) {
    coldrl::ZipfParams p;
    p.n_keys = 5000;
    p.n_requests = 100000;
    coldrl::Trace trace = coldrl::gen_zipf(p, 7);
    for (auto _ : state) {
        coldrl::LruPolicy lru;
        auto report = coldrl::replay(trace, 32 * 1024 * 1024, lru);
        benchmark::DoNotOptimize(report.hits);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(trace.records.size()));
}

} // namespace

BENCHMARK(BM_ReplayLru)->Unit(benchmark::kMillisecond);
