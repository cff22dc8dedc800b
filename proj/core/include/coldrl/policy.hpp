#pragma once

#include "coldrl/cache.hpp"
#include "coldrl/features.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace coldrl {

// Where a victim set came from. Classical baselines always report
// `classical`; the learned/sidecar policies report the full provenance.
enum class DecisionSource {
    classical,
    learned,
    shadow,
    fallback_timeout,
    fallback_error,
    fallback_breaker,
    fallback_rollout,
};

std::string_view to_string(DecisionSource s);

struct DecisionInfo {
    DecisionSource source = DecisionSource::classical;
    bool partial_fallback = false;  // learned mask freed too little, LRU topped up
    std::uint64_t learned_mask = 0; // recorded even when not applied (shadow)
    double ipc_latency_us = 0.0;    // set by IPC-backed policies only
};

class EvictionPolicy {
public:
    virtual ~EvictionPolicy() = default;

    virtual std::string_view name() const = 0;

    // Victims must be resident, distinct, and their sizes must sum to
    // >= needed unless the cache holds fewer bytes than needed.
    virtual std::vector<std::string> select_victims(const CacheState& state,
                                                    std::uint64_t needed) = 0;

    virtual void on_hit(const CacheState&, const std::string&) {}
    virtual void on_admit(const CacheState&, const std::string&) {}
    // expired = true when the simulator reclaims a dead entry (not a decision).
    virtual void on_evict(const CacheState&, const std::string&, bool /*expired*/) {}

    // Provenance of the most recent select_victims call.
    virtual const DecisionInfo& last_decision() const { return last_; }

protected:
    DecisionInfo last_;
};

struct Candidate {
    std::string key;
    std::size_t index = 0;      // 0..K-1, coldest first
    RawFeatures raw_features{};
    std::uint64_t size = 0;
};

// The min(K, resident) coldest entries from the recency tail, coldest first.
// Expired entries are excluded (the simulator reclaims them for free).
// Cost is O(K), independent of cache size.
std::vector<Candidate> k_tail_candidates(const CacheState& state, std::size_t k);

} // namespace coldrl
