#include "coldrl/protocol.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_EncodeDecodeRequest(benchmark::State& state) {
    coldrl::EvictRequest req;
    req.k = static_cast<std::uint8_t>(state.range(0));
    req.needed_bytes = 1 << 20;
    req.features.assign(static_cast<std::size_t>(req.k) * 6, 0.5f);
    for (auto _ : state) {
        auto bytes = coldrl::encode_request(req);
        coldrl::EvictRequest out;
        auto err = coldrl::decode_request(bytes, out);
        benchmark::DoNotOptimize(err);
    }
}

} // namespace

BENCHMARK(BM_EncodeDecodeRequest)->Arg(8)->Arg(32);
