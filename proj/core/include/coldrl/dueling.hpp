#pragma once

#include "coldrl/features.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace coldrl {

inline constexpr std::size_t kHidden1 = 128;
inline constexpr std::size_t kHidden2 = 64;
// 6*128+128 + 128*64+64 + 64+1 + 64+1
inline constexpr std::size_t kParamCount = 9282;
inline constexpr std::uint16_t kModelVersion = 1;

// Per-candidate shared trunk with a pooled value head:
//   h1_i = relu(W1 x_i + b1), h2_i = relu(W2 h1_i + b2)
//   a_i = Wa h2_i + ba,       v = Wv mean_i(h2_i) + bv
//   Q_i = v + a_i - mean_j(a_j)
// Q_i is the predicted keep-value of candidate i; victims are lowest-Q.
struct DuelingModel {
    std::vector<float> w1;  // 128x6 row-major
    std::vector<float> b1;  // 128
    std::vector<float> w2;  // 64x128
    std::vector<float> b2;  // 64
    std::vector<float> wa;  // 1x64
    std::vector<float> ba;  // 1
    std::vector<float> wv;  // 1x64
    std::vector<float> bv;  // 1
    NormParams norm;
    std::uint32_t k_trained = 0;
    std::uint16_t version = kModelVersion;

    static DuelingModel zeros();
    std::size_t param_count() const;
    bool finite() const;
};

// Preallocated activations so the serving path stays allocation-free.
struct ForwardScratch {
    std::vector<float> h1;  // K x 128
    std::vector<float> h2;  // K x 64
    std::vector<float> adv; // K
    void resize(std::size_t k);
};

// X is K rows of 6 normalized features, row-major; writes K Q-values.
void forward(const DuelingModel& m, std::span<const float> x, std::size_t k,
             std::span<float> q_out, ForwardScratch& scratch);

std::vector<float> forward(const DuelingModel& m, std::span<const float> x, std::size_t k);

// Lowest keep-value first (ties by index ascending), selected until the
// freed bytes cover `needed`; if all K are insufficient the mask is all K.
std::uint64_t select_mask(std::span<const float> q, std::span<const std::uint64_t> sizes,
                          std::uint64_t needed);

} // namespace coldrl
