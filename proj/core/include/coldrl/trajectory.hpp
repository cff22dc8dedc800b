#pragma once

#include "coldrl/coldrl_policy.hpp"
#include "coldrl/sim.hpp"
#include "coldrl/trace.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace coldrl {

// One eviction decision captured during replay: every K-tail candidate with
// its raw features, the mask the behavior policy chose, and (after
// labelling) the reward y_i = 1 iff the candidate's key is requested again
// strictly before its TTL expiry.
struct DecisionSample {
    double now = 0.0;
    std::uint64_t needed = 0;
    std::vector<std::string> keys;           // coldest first
    std::vector<RawFeatures> raw;            // per candidate
    std::vector<std::uint64_t> sizes;
    std::vector<double> expires_at;          // at decision time
    std::uint64_t chosen_mask = 0;
    std::vector<float> labels;               // filled by label_decisions
};

struct Trajectory {
    std::vector<DecisionSample> decisions;
};

struct GenConfig {
    double epsilon = 0.2;   // probability of taking the LRU mask instead
    std::size_t k = 16;
    std::uint64_t seed = 0;
    AblationMask ablate{};
};

// Labels every candidate of every decision against the trace: y_i = 1 iff a
// request for the key exists at t' with now < t' < expires_at. Uses a
// per-key next-occurrence index.
void label_decisions(const Trace& trace, Trajectory& trajectory);

// Replay under the epsilon-LRU behavior policy (pure LRU masks when no
// model is given), capturing one DecisionSample per eviction decision.
// Deterministic per seed. Labels are filled in before returning.
Trajectory generate_trajectories(const Trace& trace, std::uint64_t capacity,
                                 const std::optional<DuelingModel>& model,
                                 const GenConfig& config);

} // namespace coldrl
