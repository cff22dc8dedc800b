#pragma once

#include "coldrl/cache.hpp"
#include "coldrl/policy.hpp"
#include "coldrl/trace.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace coldrl {

enum class StepOutcome { Hit, Miss, ExpiredMiss };

struct LatencySummary {
    double p50_us = 0.0;
    double p95_us = 0.0;
    double p99_us = 0.0;
};

struct SimReport {
    std::uint64_t requests = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t expired_hits = 0;      // expired-entry lookups, counted as misses
    double hit_ratio = 0.0;
    double byte_hit_ratio = 0.0;
    std::uint64_t hit_bytes = 0;
    std::uint64_t requested_bytes = 0;
    std::uint64_t origin_bytes = 0;      // requested_bytes - hit_bytes
    std::uint64_t evictions = 0;         // objects evicted by policy decisions
    std::uint64_t eviction_events = 0;   // decision rounds
    std::uint64_t fallback_events = 0;
    LatencySummary decision_latency;
    std::string policy;
    std::uint64_t capacity = 0;
};

struct SimConfig {
    bool audit = false;  // per-step invariant walk, for tests
};

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Replays a trace through one CacheState under one policy. Single-threaded;
// distinct simulators may run in parallel.
class Simulator {
public:
    Simulator(std::uint64_t capacity, EvictionPolicy& policy, SimConfig config = {});

    StepOutcome step(const RequestRecord& record);
    SimReport finish();

    CacheState& state() { return state_; }
    const CacheState& state() const { return state_; }

    // Invoked once per decision round, after victims are validated and
    // before they are removed. Used for trajectory capture.
    using DecisionHook = std::function<void(const CacheState&, std::uint64_t needed,
                                            const std::vector<std::string>& victims)>;
    void set_decision_hook(DecisionHook hook) { hook_ = std::move(hook); }

private:
    void ensure_space(std::uint64_t needed);

    CacheState state_;
    EvictionPolicy& policy_;
    SimConfig config_;
    SimReport report_;
    std::vector<double> latencies_us_;
    DecisionHook hook_;
};

SimReport replay(const Trace& trace, std::uint64_t capacity, EvictionPolicy& policy,
                 SimConfig config = {});

// Nearest-rank percentile over an unsorted sample (copied and sorted).
double nearest_rank_percentile(std::vector<double> values, double pct);
LatencySummary summarize_latency(const std::vector<double>& values_us);

} // namespace coldrl
