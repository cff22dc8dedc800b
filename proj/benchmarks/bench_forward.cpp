#include "coldrl/dueling.hpp"
#include "coldrl/rng.hpp"
#include "coldrl/train.hpp"

#include <benchmark/benchmark.h>

namespace {

// Inference cost per decision for the K values the candidate selector uses.
void BM_Forward(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    coldrl::DuelingModel model = coldrl::params_to_model(coldrl::init_params(1));
    coldrl::Xoshiro256 rng(2);
    std::vector<float> x(k * coldrl::kFeatureCount);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    std::vector<float> q(k);
    coldrl::ForwardScratch scratch;
    scratch.resize(k);
    for (auto _ : state) {
        coldrl::forward(model, x, k, q, scratch);
        benchmark::DoNotOptimize(q.data());
    }
}

} // namespace

BENCHMARK(BM_Forward)->Arg(8)->Arg(16)->Arg(32)->Arg(64);
