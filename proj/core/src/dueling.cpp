#include "coldrl/dueling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace coldrl {

DuelingModel DuelingModel::zeros() {
    DuelingModel m;
    m.w1.assign(kHidden1 * kFeatureCount, 0.0f);
    m.b1.assign(kHidden1, 0.0f);
    m.w2.assign(kHidden2 * kHidden1, 0.0f);
    m.b2.assign(kHidden2, 0.0f);
    m.wa.assign(kHidden2, 0.0f);
    m.ba.assign(1, 0.0f);
    m.wv.assign(kHidden2, 0.0f);
    m.bv.assign(1, 0.0f);
    return m;
}

std::size_t DuelingModel::param_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() +
           wa.size() + ba.size() + wv.size() + bv.size();
}

bool DuelingModel::finite() const {
    auto ok = [](const std::vector<float>& v) {
        return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
    };
    return ok(w1) && ok(b1) && ok(w2) && ok(b2) && ok(wa) && ok(ba) && ok(wv) && ok(bv);
}

void ForwardScratch::resize(std::size_t k) {
    h1.resize(k * kHidden1);
    h2.resize(k * kHidden2);
    adv.resize(k);
}

void forward(const DuelingModel& m, std::span<const float> x, std::size_t k,
             std::span<float> q_out, ForwardScratch& s) {
    if (k < 1) throw std::invalid_argument("forward: K must be >= 1");
    if (x.size() != k * kFeatureCount) throw std::invalid_argument("forward: bad input size");
    if (q_out.size() != k) throw std::invalid_argument("forward: bad output size");
    for (float v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("forward: non-finite input");

    for (std::size_t i = 0; i < k; ++i) {
        const float* xi = x.data() + i * kFeatureCount;
        float* h1 = s.h1.data() + i * kHidden1;
        for (std::size_t j = 0; j < kHidden1; ++j) {
            const float* w = m.w1.data() + j * kFeatureCount;
            float acc = m.b1[j];
            for (std::size_t f = 0; f < kFeatureCount; ++f) acc += w[f] * xi[f];
            h1[j] = acc > 0.0f ? acc : 0.0f;
        }
        float* h2 = s.h2.data() + i * kHidden2;
        for (std::size_t j = 0; j < kHidden2; ++j) {
            const float* w = m.w2.data() + j * kHidden1;
            float acc = m.b2[j];
            for (std::size_t f = 0; f < kHidden1; ++f) acc += w[f] * h1[f];
            h2[j] = acc > 0.0f ? acc : 0.0f;
        }
        float a = m.ba[0];
        for (std::size_t f = 0; f < kHidden2; ++f) a += m.wa[f] * h2[f];
        s.adv[i] = a;
    }

    // Value head over the mean-pooled trunk output.
    float v = m.bv[0];
    for (std::size_t f = 0; f < kHidden2; ++f) {
        float pooled = 0.0f;
        for (std::size_t i = 0; i < k; ++i) pooled += s.h2[i * kHidden2 + f];
        v += m.wv[f] * (pooled / static_cast<float>(k));
    }

    float mean_a = 0.0f;
    for (std::size_t i = 0; i < k; ++i) mean_a += s.adv[i];
    mean_a /= static_cast<float>(k);
    for (std::size_t i = 0; i < k; ++i) q_out[i] = v + s.adv[i] - mean_a;
}

std::vector<float> forward(const DuelingModel& m, std::span<const float> x, std::size_t k) {
    ForwardScratch s;
    s.resize(k);
    std::vector<float> q(k);
    forward(m, x, k, q, s);
    return q;
}

std::uint64_t select_mask(std::span<const float> q, std::span<const std::uint64_t> sizes,
                          std::uint64_t needed) {
    if (q.size() != sizes.size()) throw std::invalid_argument("select_mask: length mismatch");
    if (q.size() > 64) throw std::invalid_argument("select_mask: K > 64");
    if (needed == 0) return 0;

    std::vector<std::size_t> idx(q.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (q[a] != q[b]) return q[a] < q[b];
        return a < b;
    });

    std::uint64_t mask = 0, freed = 0;
    for (std::size_t i : idx) {
        if (freed >= needed) break;
        mask |= std::uint64_t{1} << i;
        freed += sizes[i];
    }
    if (freed < needed) {
        mask = q.size() == 64 ? ~std::uint64_t{0}
                              : (std::uint64_t{1} << q.size()) - 1;
    }
    return mask;
}

} // namespace coldrl
