#pragma once

#include <cstdint>
#include <cmath>

namespace coldrl {

// Portable seedable PRNG: xoshiro256** seeded via splitmix64.
// Fixed here (and in the README) so generated traces are reproducible
// across implementations and platforms.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), n >= 1. Rejection-free modulo bias is
    // irrelevant here (n << 2^64) but we debias anyway for portability.
    std::uint64_t uniform_u64(std::uint64_t n) {
        const std::uint64_t bound = n * (UINT64_MAX / n);
        std::uint64_t r;
        do { r = next(); } while (r >= bound);
        return r % n;
    }

    // Exponential inter-arrival gap with the given rate (events/second).
    double exp_gap(double rate) {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return -std::log(u) / rate;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

} // namespace coldrl
