#pragma once

#include "coldrl/dueling.hpp"
#include "coldrl/policies.hpp"

#include <array>

namespace coldrl {

using AblationMask = std::array<bool, kFeatureCount>;

// Normalized rows for a candidate list, with selected features zeroed out
// (the ablation harness). Row-major K x 6.
std::vector<float> normalized_rows(const std::vector<Candidate>& candidates,
                                   const NormParams& norm, const AblationMask& ablate);

// In-process learned eviction: K-tail candidates -> normalize -> forward ->
// select_mask. When the masked candidates free too little, the remainder is
// covered by native LRU beyond the candidates and the decision is marked as
// a partial fallback.
class ColdRlPolicy : public EvictionPolicy {
public:
    ColdRlPolicy(DuelingModel model, std::size_t k, AblationMask ablate = {});

    std::string_view name() const override { return "coldrl"; }
    std::vector<std::string> select_victims(const CacheState&, std::uint64_t needed) override;

    const DuelingModel& model() const { return model_; }
    std::size_t k() const { return k_; }

private:
    DuelingModel model_;
    std::size_t k_;
    AblationMask ablate_;
    ForwardScratch scratch_;
};

// Extends `victims` (already chosen, resident) with recency-tail keys until
// the freed bytes cover `needed`. Returns true if anything was added.
bool extend_with_lru(const CacheState& state, std::uint64_t needed,
                     std::vector<std::string>& victims);

} // namespace coldrl
