#include "coldrl/workload.hpp"
#include "coldrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace coldrl {

namespace {

std::uint64_t log_uniform_size(Xoshiro256& rng, std::uint64_t lo, std::uint64_t hi) {
    if (lo >= hi) return lo;
    double s = std::exp(rng.uniform(std::log(static_cast<double>(lo)),
                                    std::log(static_cast<double>(hi))));
    auto v = static_cast<std::uint64_t>(std::llround(s));
    return std::clamp(v, lo, hi);
}

// Per-key origin RTT, log-uniform over a plausible 5..200 ms span.
double draw_rtt(Xoshiro256& rng) {
    return std::exp(rng.uniform(std::log(5.0), std::log(200.0)));
}

// Cumulative Zipf(alpha) mass over ranks 1..n; sampling is a binary search
// over one uniform draw.
std::vector<double> zipf_cdf(std::uint64_t n, double alpha) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::uint64_t r = 0; r < n; ++r) {
        acc += std::pow(static_cast<double>(r + 1), -alpha);
        cdf[r] = acc;
    }
    for (auto& v : cdf) v /= acc;
    return cdf;
}

std::uint64_t zipf_draw(const std::vector<double>& cdf, Xoshiro256& rng) {
    double u = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::uint64_t>(it - cdf.begin());
}

} // namespace

Trace gen_zipf(const ZipfParams& p, std::uint64_t seed) {
    if (p.n_keys < 1) throw WorkloadError("gen_zipf: n_keys must be >= 1");
    if (p.n_requests < 1) throw WorkloadError("gen_zipf: n_requests must be >= 1");
    if (p.alpha < 0) throw WorkloadError("gen_zipf: alpha must be >= 0");
    if (p.size_min < 1 || p.size_max < p.size_min)
        throw WorkloadError("gen_zipf: require 1 <= size_min <= size_max");
    if (p.ttl <= 0) throw WorkloadError("gen_zipf: ttl must be > 0");
    if (p.rate <= 0) throw WorkloadError("gen_zipf: rate must be > 0");

    Xoshiro256 rng(seed);
    auto cdf = zipf_cdf(p.n_keys, p.alpha);

    std::vector<std::uint64_t> sizes(p.n_keys);
    std::vector<double> rtts(p.n_keys);
    for (std::uint64_t k = 0; k < p.n_keys; ++k) {
        sizes[k] = log_uniform_size(rng, p.size_min, p.size_max);
        rtts[k] = draw_rtt(rng);
    }

    Trace trace;
    trace.records.reserve(p.n_requests);
    const double dt = 1.0 / p.rate;
    for (std::uint64_t i = 0; i < p.n_requests; ++i) {
        std::uint64_t k = zipf_draw(cdf, rng);
        trace.records.push_back({static_cast<double>(i) * dt,
                                 "z" + std::to_string(k), sizes[k], p.ttl, rtts[k]});
    }

    trace.meta.generator = "zipf";
    trace.meta.seed = seed;
    trace.meta.params = {
        {"n_keys", std::to_string(p.n_keys)},
        {"n_requests", std::to_string(p.n_requests)},
        {"alpha", std::to_string(p.alpha)},
        {"size_min", std::to_string(p.size_min)},
        {"size_max", std::to_string(p.size_max)},
        {"ttl", std::to_string(p.ttl)},
        {"rate", std::to_string(p.rate)},
    };
    return trace;
}

Trace gen_trap(const TrapParams& p, std::uint64_t seed) {
    if (p.duration < p.burst_period)
        throw WorkloadError("gen_trap: duration shorter than one burst period");
    if (p.n_small_hot < 1 || p.n_large_hot < 1 || p.burst_width < 1)
        throw WorkloadError("gen_trap: counts must be >= 1");
    if (p.base_rate <= 0 || p.scan_rate <= 0 || p.burst_period <= 0)
        throw WorkloadError("gen_trap: rates and period must be > 0");
    if (p.small_size < 1 || p.large_size_min < 1 || p.large_size_max < p.large_size_min ||
        p.burst_object_size < 1 || p.scan_size < 1)
        throw WorkloadError("gen_trap: invalid size parameters");
    if (p.ttl_default <= 0) throw WorkloadError("gen_trap: ttl_default must be > 0");

    std::uint64_t sm = seed;
    Xoshiro256 small_rng(splitmix64(sm));
    Xoshiro256 large_rng(splitmix64(sm));
    Xoshiro256 burst_rng(splitmix64(sm));
    Xoshiro256 scan_rng(splitmix64(sm));

    Trace trace;

    // (a) Zipf arrivals over the small hot set.
    {
        auto cdf = zipf_cdf(p.n_small_hot, p.zipf_alpha);
        std::vector<double> rtts(p.n_small_hot);
        for (auto& r : rtts) r = draw_rtt(small_rng);
        double t = small_rng.exp_gap(p.base_rate);
        while (t < p.duration) {
            std::uint64_t k = zipf_draw(cdf, small_rng);
            trace.records.push_back({t, "hot" + std::to_string(k), p.small_size,
                                     p.ttl_default, rtts[k]});
            t += small_rng.exp_gap(p.base_rate);
        }
    }

    // (b) Size inversion: a handful of large objects requested frequently,
    // combined rate one tenth of the small-hot rate.
    {
        const double rate = p.base_rate * 0.1;
        std::vector<std::uint64_t> sizes(p.n_large_hot);
        std::vector<double> rtts(p.n_large_hot);
        for (std::uint64_t k = 0; k < p.n_large_hot; ++k) {
            sizes[k] = log_uniform_size(large_rng, p.large_size_min, p.large_size_max);
            rtts[k] = draw_rtt(large_rng);
        }
        double t = large_rng.exp_gap(rate);
        while (t < p.duration) {
            std::uint64_t k = large_rng.uniform_u64(p.n_large_hot);
            trace.records.push_back({t, "big" + std::to_string(k), sizes[k],
                                     p.ttl_default, rtts[k]});
            t += large_rng.exp_gap(rate);
        }
    }

    // (c) Bursts: floor(duration / burst_period) windows of disjoint fresh
    // keys, each key requested exactly twice within its window.
    {
        const auto n_windows = static_cast<std::uint64_t>(p.duration / p.burst_period);
        const double window = std::min(600.0, p.burst_period / 6.0);
        std::uint64_t next_key = 0;
        for (std::uint64_t w = 0; w < n_windows; ++w) {
            const double t0 = static_cast<double>(w) * p.burst_period;
            for (std::uint64_t i = 0; i < p.burst_width; ++i) {
                const std::string key = "burst" + std::to_string(next_key++);
                const double rtt = draw_rtt(burst_rng);
                double first = t0 + burst_rng.uniform() * window * 0.5;
                double second = first + burst_rng.uniform(window * 0.1, window * 0.5);
                trace.records.push_back({first, key, p.burst_object_size, p.ttl_default, rtt});
                trace.records.push_back({second, key, p.burst_object_size, p.ttl_default, rtt});
            }
        }
    }

    // (d) Scan of never-repeated keys.
    {
        std::uint64_t next_key = 0;
        double t = scan_rng.exp_gap(p.scan_rate);
        while (t < p.duration) {
            trace.records.push_back({t, "scan" + std::to_string(next_key++), p.scan_size,
                                     p.ttl_default, draw_rtt(scan_rng)});
            t += scan_rng.exp_gap(p.scan_rate);
        }
    }

    std::stable_sort(trace.records.begin(), trace.records.end(),
                     [](const RequestRecord& a, const RequestRecord& b) { return a.ts < b.ts; });

    trace.meta.generator = "trap";
    trace.meta.seed = seed;
    trace.meta.params = {
        {"duration", std::to_string(p.duration)},
        {"n_small_hot", std::to_string(p.n_small_hot)},
        {"small_size", std::to_string(p.small_size)},
        {"n_large_hot", std::to_string(p.n_large_hot)},
        {"large_size_min", std::to_string(p.large_size_min)},
        {"large_size_max", std::to_string(p.large_size_max)},
        {"burst_period", std::to_string(p.burst_period)},
        {"burst_width", std::to_string(p.burst_width)},
        {"burst_object_size", std::to_string(p.burst_object_size)},
        {"scan_rate", std::to_string(p.scan_rate)},
        {"scan_size", std::to_string(p.scan_size)},
        {"zipf_alpha", std::to_string(p.zipf_alpha)},
        {"base_rate", std::to_string(p.base_rate)},
        {"ttl_default", std::to_string(p.ttl_default)},
    };
    return trace;
}

} // namespace coldrl
