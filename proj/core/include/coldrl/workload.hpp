#pragma once

#include "coldrl/trace.hpp"

#include <cstdint>

namespace coldrl {

struct ZipfParams {
    std::uint64_t n_keys = 1000;
    std::uint64_t n_requests = 100000;
    double alpha = 1.0;
    std::uint64_t size_min = 1024;       // per-key sizes are log-uniform
    std::uint64_t size_max = 1024 * 1024;
    double ttl = 86400.0;                 // seconds, applied to every record
    double rate = 100.0;                  // requests/second (fixed spacing)
};

struct TrapParams {
    double duration = 0.0;                 // seconds; must cover >= 1 burst period
    std::uint64_t n_small_hot = 200;
    std::uint64_t small_size = 20 * 1024;
    std::uint64_t n_large_hot = 5;
    std::uint64_t large_size_min = 5 * 1024 * 1024;
    std::uint64_t large_size_max = 15 * 1024 * 1024;
    double burst_period = 3600.0;          // seconds between burst windows
    std::uint64_t burst_width = 500;       // distinct keys per burst
    std::uint64_t burst_object_size = 256 * 1024;
    double scan_rate = 1.0;                // one-time keys per second
    std::uint64_t scan_size = 1024 * 1024;
    double zipf_alpha = 1.0;
    double base_rate = 50.0;               // small-hot requests/second
    double ttl_default = 4 * 3600.0;       // = 4 x burst_period
};

class WorkloadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Skewed-popularity workload: key popularity ~ Zipf(alpha), per-key size
// fixed at first draw, requests evenly spaced at params.rate.
Trace gen_zipf(const ZipfParams& params, std::uint64_t seed);

// Adversarial benchmark interleaving four sub-streams:
//   (a) Zipf arrivals over small hot objects,
//   (b) frequent requests to a few large hot objects (size inversion),
//   (c) periodic bursts of fresh keys, each requested exactly twice,
//   (d) a steady scan of never-repeated keys.
Trace gen_trap(const TrapParams& params, std::uint64_t seed);

} // namespace coldrl
