#include "coldrl/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_set>

namespace coldrl {

Simulator::Simulator(std::uint64_t capacity, EvictionPolicy& policy, SimConfig config)
    : state_(capacity), policy_(policy), config_(config) {
    if (capacity == 0) throw SimError("simulator: capacity must be > 0");
    report_.policy = std::string(policy.name());
    report_.capacity = capacity;
}

StepOutcome Simulator::step(const RequestRecord& record) {
    if (record.ts < state_.now())
        throw SimError("simulator: trace time went backwards at key '" + record.key + "'");
    state_.advance_clock(record.ts);

    report_.requests += 1;
    report_.requested_bytes += record.size;

    StepOutcome outcome;
    const CacheEntry* e = state_.find(record.key);
    if (e != nullptr && state_.expired(*e)) {
        policy_.on_evict(state_, record.key, /*expired=*/true);
        state_.remove(record.key);
        e = nullptr;
        outcome = StepOutcome::ExpiredMiss;
        report_.expired_hits += 1;
    } else {
        outcome = e != nullptr ? StepOutcome::Hit : StepOutcome::Miss;
    }

    if (outcome == StepOutcome::Hit) {
        report_.hits += 1;
        report_.hit_bytes += record.size;
        state_.touch(record.key);
        policy_.on_hit(state_, record.key);
    } else {
        report_.misses += 1;
        // Objects larger than the cache bypass it entirely.
        if (record.size <= state_.capacity()) {
            if (state_.used() + record.size > state_.capacity())
                ensure_space(record.size);
            CacheEntry fresh;
            fresh.key = record.key;
            fresh.size = record.size;
            fresh.inserted_at = record.ts;
            fresh.last_access = record.ts;
            fresh.hit_count = 0;
            fresh.expires_at = record.ts + record.ttl;
            fresh.origin_rtt = record.origin_rtt;
            state_.admit(fresh);
            policy_.on_admit(state_, record.key);
        }
    }

    if (config_.audit && !state_.audit())
        throw SimError("simulator: state audit failed after key '" + record.key + "'");
    return outcome;
}

void Simulator::ensure_space(std::uint64_t needed) {
    // Dead entries are reclaimed for free before any victim is chosen.
    state_.reclaim_expired([&](const CacheEntry& e) {
        policy_.on_evict(state_, e.key, /*expired=*/true);
    });

    while (state_.used() + needed > state_.capacity() && state_.resident_count() > 0) {
        const std::uint64_t shortfall = state_.used() + needed - state_.capacity();

        auto t0 = std::chrono::steady_clock::now();
        std::vector<std::string> victims = policy_.select_victims(state_, shortfall);
        auto t1 = std::chrono::steady_clock::now();

        report_.eviction_events += 1;
        latencies_us_.push_back(
            std::chrono::duration<double, std::micro>(t1 - t0).count());

        const DecisionInfo& info = policy_.last_decision();
        if (info.partial_fallback || (info.source != DecisionSource::classical &&
                                      info.source != DecisionSource::learned))
            report_.fallback_events += 1;

        std::unordered_set<std::string> seen;
        for (const auto& key : victims) {
            if (!state_.resident(key))
                throw SimError("policy '" + std::string(policy_.name()) +
                               "' returned non-resident victim '" + key + "'");
            if (!seen.insert(key).second)
                throw SimError("policy '" + std::string(policy_.name()) +
                               "' returned duplicate victim '" + key + "'");
        }
        if (victims.empty())
            throw SimError("policy '" + std::string(policy_.name()) +
                           "' returned no victims while space is needed");

        if (hook_) hook_(state_, shortfall, victims);

        for (const auto& key : victims) {
            policy_.on_evict(state_, key, /*expired=*/false);
            state_.remove(key);
            report_.evictions += 1;
        }
    }
}

SimReport Simulator::finish() {
    if (report_.requests > 0) {
        report_.hit_ratio = static_cast<double>(report_.hits) /
                            static_cast<double>(report_.requests);
        report_.byte_hit_ratio = static_cast<double>(report_.hit_bytes) /
                                 static_cast<double>(report_.requested_bytes);
    }
    report_.origin_bytes = report_.requested_bytes - report_.hit_bytes;
    report_.decision_latency = summarize_latency(latencies_us_);
    return report_;
}

SimReport replay(const Trace& trace, std::uint64_t capacity, EvictionPolicy& policy,
                 SimConfig config) {
    Simulator sim(capacity, policy, config);
    for (const auto& rec : trace.records) sim.step(rec);
    return sim.finish();
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile of empty sample");
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

LatencySummary summarize_latency(const std::vector<double>& values_us) {
    LatencySummary s;
    if (values_us.empty()) return s;
    s.p50_us = nearest_rank_percentile(values_us, 50);
    s.p95_us = nearest_rank_percentile(values_us, 95);
    s.p99_us = nearest_rank_percentile(values_us, 99);
    return s;
}

} // namespace coldrl
