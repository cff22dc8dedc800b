#include "coldrl/coldrl_policy.hpp"

#include <unordered_set>

namespace coldrl {

std::vector<float> normalized_rows(const std::vector<Candidate>& candidates,
                                   const NormParams& norm, const AblationMask& ablate) {
    std::vector<float> x(candidates.size() * kFeatureCount);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto row = normalize(candidates[i].raw_features, norm);
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            x[i * kFeatureCount + j] = ablate[j] ? 0.0f : row[j];
    }
    return x;
}

bool extend_with_lru(const CacheState& state, std::uint64_t needed,
                     std::vector<std::string>& victims) {
    std::unordered_set<std::string> chosen(victims.begin(), victims.end());
    std::uint64_t freed = 0;
    for (const auto& key : victims) freed += state.entry(key).size;
    if (freed >= needed) return false;

    bool added = false;
    const auto& recency = state.recency();
    for (auto it = recency.rbegin(); it != recency.rend() && freed < needed; ++it) {
        if (chosen.contains(*it)) continue;
        victims.push_back(*it);
        freed += state.entry(*it).size;
        added = true;
    }
    return added;
}

ColdRlPolicy::ColdRlPolicy(DuelingModel model, std::size_t k, AblationMask ablate)
    : model_(std::move(model)), k_(k), ablate_(ablate) {
    if (k_ < 1 || k_ > 64) throw std::invalid_argument("coldrl: K must be in 1..64");
    scratch_.resize(k_);
}

std::vector<std::string> ColdRlPolicy::select_victims(const CacheState& state,
                                                      std::uint64_t needed) {
    last_ = DecisionInfo{};
    last_.source = DecisionSource::learned;

    auto candidates = k_tail_candidates(state, k_);
    auto x = normalized_rows(candidates, model_.norm, ablate_);

    std::vector<float> q(candidates.size());
    forward(model_, x, candidates.size(), q, scratch_);

    std::vector<std::uint64_t> sizes(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) sizes[i] = candidates[i].size;
    const std::uint64_t mask = select_mask(q, sizes, needed);
    last_.learned_mask = mask;

    std::vector<std::string> victims;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (mask & (std::uint64_t{1} << i)) victims.push_back(candidates[i].key);

    if (extend_with_lru(state, needed, victims)) last_.partial_fallback = true;
    return victims;
}

} // namespace coldrl
