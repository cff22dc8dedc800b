#include "coldrl/trajectory.hpp"
#include "coldrl/rng.hpp"

#include <algorithm>
#include <unordered_map>

namespace coldrl {

void label_decisions(const Trace& trace, Trajectory& trajectory) {
    std::unordered_map<std::string, std::vector<double>> occurrences;
    for (const auto& rec : trace.records) occurrences[rec.key].push_back(rec.ts);

    for (auto& d : trajectory.decisions) {
        d.labels.resize(d.keys.size());
        for (std::size_t i = 0; i < d.keys.size(); ++i) {
            auto it = occurrences.find(d.keys[i]);
            if (it == occurrences.end())
                throw SimError("label_decisions: decision references key '" + d.keys[i] +
                               "' absent from trace");
            const auto& times = it->second;
            auto next = std::upper_bound(times.begin(), times.end(), d.now);
            d.labels[i] = (next != times.end() && *next < d.expires_at[i]) ? 1.0f : 0.0f;
        }
    }
}

namespace {

// Epsilon-greedy behavior: LRU mask with probability epsilon (always, when
// no model is available), the current model's mask otherwise. Records one
// DecisionSample per decision round.
class BehaviorPolicy : public EvictionPolicy {
public:
    BehaviorPolicy(const std::optional<DuelingModel>& model, const GenConfig& config,
                   Trajectory& out)
        : model_(model), config_(config), out_(out), rng_(config.seed) {
        scratch_.resize(config.k);
    }

    std::string_view name() const override { return "behavior"; }

    std::vector<std::string> select_victims(const CacheState& state,
                                            std::uint64_t needed) override {
        last_ = DecisionInfo{};
        auto candidates = k_tail_candidates(state, config_.k);

        std::vector<std::uint64_t> sizes(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) sizes[i] = candidates[i].size;

        std::uint64_t mask;
        const bool explore = !model_.has_value() || rng_.uniform() < config_.epsilon;
        if (explore) {
            // LRU over the tail = take the candidate prefix.
            mask = 0;
            std::uint64_t freed = 0;
            for (std::size_t i = 0; i < candidates.size() && freed < needed; ++i) {
                mask |= std::uint64_t{1} << i;
                freed += sizes[i];
            }
        } else {
            auto x = normalized_rows(candidates, model_->norm, config_.ablate);
            std::vector<float> q(candidates.size());
            forward(*model_, x, candidates.size(), q, scratch_);
            mask = select_mask(q, sizes, needed);
        }

        DecisionSample sample;
        sample.now = state.now();
        sample.needed = needed;
        sample.chosen_mask = mask;
        for (const auto& c : candidates) {
            sample.keys.push_back(c.key);
            sample.raw.push_back(c.raw_features);
            sample.sizes.push_back(c.size);
            sample.expires_at.push_back(state.entry(c.key).expires_at);
        }
        out_.decisions.push_back(std::move(sample));

        std::vector<std::string> victims;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (mask & (std::uint64_t{1} << i)) victims.push_back(candidates[i].key);
        extend_with_lru(state, needed, victims);
        return victims;
    }

private:
    const std::optional<DuelingModel>& model_;
    GenConfig config_;
    Trajectory& out_;
    Xoshiro256 rng_;
    ForwardScratch scratch_;
};

} // namespace

Trajectory generate_trajectories(const Trace& trace, std::uint64_t capacity,
                                 const std::optional<DuelingModel>& model,
                                 const GenConfig& config) {
    Trajectory trajectory;
    BehaviorPolicy behavior(model, config, trajectory);
    replay(trace, capacity, behavior);
    label_decisions(trace, trajectory);
    return trajectory;
}

} // namespace coldrl
