#pragma once

#include "coldrl/cache.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace coldrl {

inline constexpr std::size_t kFeatureCount = 6;

// Fixed public feature order. Every serialization (wire, model file,
// trajectory file) uses this order.
enum class Feature : std::size_t {
    age = 0,
    size = 1,
    hit_count = 2,
    inter_arrival = 3,
    ttl_remaining = 4,
    origin_rtt = 5,
};

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "age", "size", "hit_count", "inter_arrival", "ttl_remaining", "origin_rtt"};

using RawFeatures = std::array<double, kFeatureCount>;

struct NormParams {
    std::array<float, kFeatureCount> mu{};
    std::array<float, kFeatureCount> sigma{1, 1, 1, 1, 1, 1};  // over log1p values
    float clamp = 8.0f;

    bool operator==(const NormParams&) const = default;
};

inline constexpr double kSigmaFloor = 1e-6;

inline RawFeatures extract(const CacheEntry& e, double now) {
    RawFeatures f;
    const double age = now - e.inserted_at;
    f[0] = age;
    f[1] = static_cast<double>(e.size);
    f[2] = static_cast<double>(e.hit_count);
    f[3] = age / static_cast<double>(std::max<std::uint64_t>(e.hit_count, 1));
    f[4] = std::max(0.0, e.expires_at - now);
    f[5] = e.origin_rtt;
    return f;
}

// mu, sigma = mean and population std of ln(1+x) per feature, sigma floored.
template <typename Range>
NormParams fit_norm(const Range& dataset) {
    std::array<double, kFeatureCount> sum{}, sumsq{};
    std::size_t n = 0;
    for (const RawFeatures& row : dataset) {
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            double v = std::log1p(row[j]);
            sum[j] += v;
            sumsq[j] += v * v;
        }
        ++n;
    }
    if (n == 0) throw std::invalid_argument("fit_norm: empty dataset");
    NormParams p;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        double mu = sum[j] / static_cast<double>(n);
        double var = std::max(0.0, sumsq[j] / static_cast<double>(n) - mu * mu);
        p.mu[j] = static_cast<float>(mu);
        p.sigma[j] = static_cast<float>(std::max(std::sqrt(var), kSigmaFloor));
    }
    return p;
}

// x' = clamp((ln(1+x) - mu) / sigma, -c, +c), in the fixed feature order.
inline std::array<float, kFeatureCount> normalize(const RawFeatures& raw, const NormParams& p) {
    std::array<float, kFeatureCount> out;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        float v = (static_cast<float>(std::log1p(raw[j])) - p.mu[j]) / p.sigma[j];
        out[j] = std::clamp(v, -p.clamp, p.clamp);
    }
    return out;
}

} // namespace coldrl
