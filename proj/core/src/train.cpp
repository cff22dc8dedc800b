#include "coldrl/train.hpp"
#include "coldrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coldrl {

namespace {

// Flat parameter layout offsets.
constexpr std::size_t kW1 = 0;
constexpr std::size_t kB1 = kW1 + kHidden1 * kFeatureCount;
constexpr std::size_t kW2 = kB1 + kHidden1;
constexpr std::size_t kB2 = kW2 + kHidden2 * kHidden1;
constexpr std::size_t kWa = kB2 + kHidden2;
constexpr std::size_t kBa = kWa + kHidden2;
constexpr std::size_t kWv = kBa + 1;
constexpr std::size_t kBv = kWv + kHidden2;
static_assert(kBv + 1 == kParamCount);

struct Activations {
    std::vector<double> z1, h1, z2, h2, a, q;
    void resize(std::size_t k) {
        z1.resize(k * kHidden1);
        h1.resize(k * kHidden1);
        z2.resize(k * kHidden2);
        h2.resize(k * kHidden2);
        a.resize(k);
        q.resize(k);
    }
};

void forward_double(const std::vector<double>& p, const double* x, std::size_t k,
                    Activations& act) {
    act.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double* xi = x + i * kFeatureCount;
        for (std::size_t j = 0; j < kHidden1; ++j) {
            const double* w = p.data() + kW1 + j * kFeatureCount;
            double acc = p[kB1 + j];
            for (std::size_t f = 0; f < kFeatureCount; ++f) acc += w[f] * xi[f];
            act.z1[i * kHidden1 + j] = acc;
            act.h1[i * kHidden1 + j] = acc > 0.0 ? acc : 0.0;
        }
        const double* h1 = act.h1.data() + i * kHidden1;
        for (std::size_t j = 0; j < kHidden2; ++j) {
            const double* w = p.data() + kW2 + j * kHidden1;
            double acc = p[kB2 + j];
            for (std::size_t f = 0; f < kHidden1; ++f) acc += w[f] * h1[f];
            act.z2[i * kHidden2 + j] = acc;
            act.h2[i * kHidden2 + j] = acc > 0.0 ? acc : 0.0;
        }
        double a = p[kBa];
        for (std::size_t f = 0; f < kHidden2; ++f)
            a += p[kWa + f] * act.h2[i * kHidden2 + f];
        act.a[i] = a;
    }

    double v = p[kBv];
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t f = 0; f < kHidden2; ++f) {
        double pooled = 0.0;
        for (std::size_t i = 0; i < k; ++i) pooled += act.h2[i * kHidden2 + f];
        v += p[kWv + f] * pooled * inv_k;
    }
    double mean_a = 0.0;
    for (std::size_t i = 0; i < k; ++i) mean_a += act.a[i];
    mean_a *= inv_k;
    for (std::size_t i = 0; i < k; ++i) act.q[i] = v + act.a[i] - mean_a;
}

double huber(double e, double delta) {
    double ae = std::abs(e);
    return ae <= delta ? 0.5 * e * e : delta * (ae - 0.5 * delta);
}

double huber_grad(double e, double delta) { return std::clamp(e, -delta, delta); }

} // namespace

namespace detail {

double sample_loss(const std::vector<double>& p, const Sample& s, double huber_delta,
                   std::vector<double>* grad, double scale) {
    thread_local Activations act;
    const std::size_t k = s.k;
    forward_double(p, s.x.data(), k, act);

    const double inv_k = 1.0 / static_cast<double>(k);
    double loss = 0.0;
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double e = act.q[i] - s.y[i];
        loss += huber(e, huber_delta) * inv_k;
        g[i] = huber_grad(e, huber_delta) * inv_k;
    }
    if (grad == nullptr) return loss;

    // Q_i = v + a_i - mean(a):  da_i = g_i - mean(g), dv = sum(g).
    double g_sum = 0.0;
    for (double gi : g) g_sum += gi;
    const double g_mean = g_sum * inv_k;

    std::vector<double>& gp = *grad;
    std::vector<double> dh2(kHidden2), dz2(kHidden2), dh1(kHidden1), dz1(kHidden1);

    // Value head: v = wv . mean_i(h2_i) + bv.
    for (std::size_t f = 0; f < kHidden2; ++f) {
        double pooled = 0.0;
        for (std::size_t i = 0; i < k; ++i) pooled += act.h2[i * kHidden2 + f];
        gp[kWv + f] += scale * g_sum * pooled * inv_k;
    }
    gp[kBv] += scale * g_sum;

    for (std::size_t i = 0; i < k; ++i) {
        const double da = g[i] - g_mean;
        const double* h2 = act.h2.data() + i * kHidden2;
        const double* h1 = act.h1.data() + i * kHidden1;
        const double* xi = s.x.data() + i * kFeatureCount;

        gp[kBa] += scale * da;
        for (std::size_t f = 0; f < kHidden2; ++f) {
            gp[kWa + f] += scale * da * h2[f];
            // dv/dh2_if = wv_f / k
            dh2[f] = da * p[kWa + f] + g_sum * inv_k * p[kWv + f];
            dz2[f] = act.z2[i * kHidden2 + f] > 0.0 ? dh2[f] : 0.0;
        }
        for (std::size_t f = 0; f < kHidden2; ++f) {
            gp[kB2 + f] += scale * dz2[f];
            double* w2g = gp.data() + kW2 + f * kHidden1;
            const double d = scale * dz2[f];
            for (std::size_t j = 0; j < kHidden1; ++j) w2g[j] += d * h1[j];
        }
        std::fill(dh1.begin(), dh1.end(), 0.0);
        for (std::size_t f = 0; f < kHidden2; ++f) {
            const double d = dz2[f];
            if (d == 0.0) continue;
            const double* w2 = p.data() + kW2 + f * kHidden1;
            for (std::size_t j = 0; j < kHidden1; ++j) dh1[j] += d * w2[j];
        }
        for (std::size_t j = 0; j < kHidden1; ++j)
            dz1[j] = act.z1[i * kHidden1 + j] > 0.0 ? dh1[j] : 0.0;
        for (std::size_t j = 0; j < kHidden1; ++j) {
            gp[kB1 + j] += scale * dz1[j];
            double* w1g = gp.data() + kW1 + j * kFeatureCount;
            const double d = scale * dz1[j];
            for (std::size_t f = 0; f < kFeatureCount; ++f) w1g[f] += d * xi[f];
        }
    }
    return loss;
}

} // namespace detail

std::vector<double> init_params(std::uint64_t seed) {
    Xoshiro256 rng(seed);
    std::vector<double> p(kParamCount, 0.0);
    auto init_layer = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
        const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (std::size_t i = 0; i < rows * cols; ++i)
            p[offset + i] = rng.uniform(-bound, bound);
    };
    init_layer(kW1, kHidden1, kFeatureCount);
    init_layer(kW2, kHidden2, kHidden1);
    init_layer(kWa, 1, kHidden2);
    init_layer(kWv, 1, kHidden2);
    return p;
}

DuelingModel params_to_model(const std::vector<double>& p) {
    DuelingModel m = DuelingModel::zeros();
    auto copy = [&](std::vector<float>& dst, std::size_t offset) {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = static_cast<float>(p[offset + i]);
    };
    copy(m.w1, kW1); copy(m.b1, kB1);
    copy(m.w2, kW2); copy(m.b2, kB2);
    copy(m.wa, kWa); copy(m.ba, kBa);
    copy(m.wv, kWv); copy(m.bv, kBv);
    return m;
}

std::vector<double> model_to_params(const DuelingModel& m) {
    std::vector<double> p(kParamCount);
    auto copy = [&](const std::vector<float>& src, std::size_t offset) {
        for (std::size_t i = 0; i < src.size(); ++i) p[offset + i] = src[i];
    };
    copy(m.w1, kW1); copy(m.b1, kB1);
    copy(m.w2, kW2); copy(m.b2, kB2);
    copy(m.wa, kWa); copy(m.ba, kBa);
    copy(m.wv, kWv); copy(m.bv, kBv);
    return p;
}

TrainResult train(const std::vector<Trajectory>& trajectories, const TrainConfig& config) {
    // Normalization constants are fit on everything the policy will see.
    std::vector<RawFeatures> all_raw;
    std::size_t n_samples = 0;
    for (const auto& t : trajectories) {
        n_samples += t.decisions.size();
        for (const auto& d : t.decisions)
            all_raw.insert(all_raw.end(), d.raw.begin(), d.raw.end());
    }
    if (n_samples == 0) throw std::invalid_argument("train: no decision samples");
    NormParams norm = fit_norm(all_raw);

    std::vector<detail::Sample> samples;
    samples.reserve(n_samples);
    std::size_t max_k = 1;
    for (const auto& t : trajectories) {
        for (std::size_t di = 0; di < t.decisions.size(); ++di) {
            const auto& d = t.decisions[di];
            if (d.labels.size() != d.keys.size())
                throw std::invalid_argument("train: unlabeled decision sample");
            if (d.keys.empty()) continue;
            detail::Sample s;
            s.k = d.keys.size();
            max_k = std::max(max_k, s.k);
            s.x.resize(s.k * kFeatureCount);
            s.y.resize(s.k);
            for (std::size_t i = 0; i < s.k; ++i) {
                auto row = normalize(d.raw[i], norm);
                for (std::size_t j = 0; j < kFeatureCount; ++j)
                    s.x[i * kFeatureCount + j] = config.ablate[j] ? 0.0 : row[j];
                s.y[i] = d.labels[i];
            }
            if (di + 1 < t.decisions.size())
                s.next = static_cast<std::ptrdiff_t>(samples.size()) + 1;
            samples.push_back(std::move(s));
        }
    }
    if (samples.empty()) throw std::invalid_argument("train: no usable decision samples");

    std::vector<double> params = init_params(config.seed);
    std::vector<double> target_params = params;  // frozen net, gamma > 0 only
    std::vector<double> grad(kParamCount);
    std::vector<double> adam_m(kParamCount, 0.0), adam_v(kParamCount, 0.0);
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    std::uint64_t sm = config.seed;
    splitmix64(sm);  // decorrelate from init_params
    Xoshiro256 rng(splitmix64(sm));
    const std::size_t batch = std::max<std::size_t>(1, config.batch);
    const std::size_t steps_per_epoch = (samples.size() + batch - 1) / batch;
    const std::size_t total_steps = std::max<std::size_t>(1, config.epochs * steps_per_epoch);

    Activations target_act;
    auto targets_for = [&](const detail::Sample& s, std::vector<double>& y_out) {
        y_out = s.y;
        if (config.gamma > 0.0 && s.next >= 0) {
            const auto& next = samples[static_cast<std::size_t>(s.next)];
            forward_double(target_params, next.x.data(), next.k, target_act);
            const double max_q = *std::max_element(target_act.q.begin(),
                                                   target_act.q.begin() + next.k);
            for (auto& y : y_out) y += config.gamma * max_q;
        }
    };

    TrainResult result;
    result.samples = samples.size();

    std::vector<double> y_tmp;
    for (std::size_t step = 0; step < total_steps; ++step) {
        if (config.gamma > 0.0 && config.target_sync > 0 && step % config.target_sync == 0)
            target_params = params;

        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        const double inv_b = 1.0 / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
            const auto& s = samples[rng.uniform_u64(samples.size())];
            targets_for(s, y_tmp);
            detail::Sample adjusted = s;
            adjusted.y = y_tmp;
            loss += detail::sample_loss(params, adjusted, config.huber_delta, &grad, inv_b) * inv_b;
        }
        if (step == 0) result.initial_loss = loss;
        result.final_loss = loss;

        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step + 1));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step + 1));
        for (std::size_t i = 0; i < kParamCount; ++i) {
            adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * grad[i];
            adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * grad[i] * grad[i];
            const double mhat = adam_m[i] / bc1;
            const double vhat = adam_v[i] / bc2;
            params[i] -= config.lr * mhat / (std::sqrt(vhat) + adam_eps);
        }
    }
    result.steps = total_steps;

    result.model = params_to_model(params);
    result.model.norm = norm;
    result.model.k_trained = static_cast<std::uint32_t>(max_k);
    return result;
}

PipelineResult train_pipeline(const Trace& trace, std::uint64_t capacity,
                              const PipelineConfig& config) {
    std::vector<Trajectory> collected;
    std::optional<DuelingModel> model;
    TrainResult last;
    const std::size_t iterations = std::max<std::size_t>(1, config.iterations);
    for (std::size_t iter = 0; iter < iterations; ++iter) {
        GenConfig gen;
        gen.epsilon = config.train.epsilon;
        gen.k = config.train.k;
        gen.seed = config.train.seed + iter;
        gen.ablate = config.train.ablate;
        Trajectory t = generate_trajectories(trace, capacity, model, gen);
        if (iter == 0 && t.decisions.empty())
            throw std::invalid_argument(
                "train: replay produced no eviction decisions; the capacity covers the "
                "working set -- lower --capacity or use a longer trace");
        collected.push_back(std::move(t));

        TrainConfig tc = config.train;
        tc.seed = config.train.seed + iter;
        last = train(collected, tc);
        model = last.model;
    }
    PipelineResult result;
    result.model = std::move(*model);
    result.final_loss = last.final_loss;
    for (const auto& t : collected) result.decisions += t.decisions.size();
    return result;
}

double grad_check(std::uint64_t seed, std::size_t k, std::size_t batch_size) {
    Xoshiro256 rng(seed);
    std::vector<double> params = init_params(seed + 1);

    std::vector<detail::Sample> batch(batch_size);
    for (auto& s : batch) {
        s.k = k;
        s.x.resize(k * kFeatureCount);
        s.y.resize(k);
        for (auto& v : s.x) v = rng.uniform(-2.0, 2.0);
        for (auto& y : s.y) y = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }

    // Nudge biases away from ReLU kinks so finite differences stay on one
    // side of every kink.
    constexpr double kink_margin = 1e-3;
    for (int pass = 0; pass < 8; ++pass) {
        Activations act;
        bool clean = true;
        for (const auto& s : batch) {
            forward_double(params, s.x.data(), s.k, act);
            for (std::size_t i = 0; i < s.k * kHidden1; ++i)
                if (std::abs(act.z1[i]) < kink_margin) {
                    params[kB1 + i % kHidden1] += 2 * kink_margin;
                    clean = false;
                }
            for (std::size_t i = 0; i < s.k * kHidden2; ++i)
                if (std::abs(act.z2[i]) < kink_margin) {
                    params[kB2 + i % kHidden2] += 2 * kink_margin;
                    clean = false;
                }
        }
        if (clean) break;
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> analytic(kParamCount, 0.0);
    for (const auto& s : batch)
        detail::sample_loss(params, s, 1.0, &analytic, inv_b);

    // Incremental finite differences: a single-parameter nudge touches only
    // a thin slice of the network, so each perturbed loss is recomposed from
    // cached base activations instead of a full forward pass. This is what
    // keeps the full 9282-parameter sweep inside the time budget.
    std::vector<Activations> base(batch.size());
    std::vector<std::vector<double>> base_pool(batch.size());
    std::vector<double> base_v(batch.size());
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        forward_double(params, batch[b].x.data(), k, base[b]);
        auto& pool = base_pool[b];
        pool.assign(kHidden2, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t f = 0; f < kHidden2; ++f)
                pool[f] += base[b].h2[i * kHidden2 + f];
        double v = params[kBv];
        for (std::size_t f = 0; f < kHidden2; ++f)
            v += params[kWv + f] * pool[f] * inv_k;
        base_v[b] = v;
    }

    std::vector<double> a_new(k);
    // Loss of the whole batch with params[idx] shifted by delta, rebuilt
    // from the cached activations.
    auto loss_shifted = [&](std::size_t idx, double delta) {
        double loss = 0.0;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto& s = batch[b];
            const auto& act = base[b];
            double v = base_v[b];
            for (std::size_t i = 0; i < k; ++i) a_new[i] = act.a[i];

            if (idx < kB1) {                      // W1[r][c]
                const std::size_t r = (idx - kW1) / kFeatureCount;
                const std::size_t c = (idx - kW1) % kFeatureCount;
                for (std::size_t i = 0; i < k; ++i) {
                    const double z1p = act.z1[i * kHidden1 + r] +
                                       delta * s.x[i * kFeatureCount + c];
                    const double dh1 = (z1p > 0.0 ? z1p : 0.0) - act.h1[i * kHidden1 + r];
                    if (dh1 == 0.0) continue;
                    for (std::size_t j = 0; j < kHidden2; ++j) {
                        const double z2p = act.z2[i * kHidden2 + j] +
                                           params[kW2 + j * kHidden1 + r] * dh1;
                        const double dh2 = (z2p > 0.0 ? z2p : 0.0) -
                                           act.h2[i * kHidden2 + j];
                        if (dh2 == 0.0) continue;
                        a_new[i] += params[kWa + j] * dh2;
                        v += params[kWv + j] * dh2 * inv_k;
                    }
                }
            } else if (idx < kW2) {               // b1[r]
                const std::size_t r = idx - kB1;
                for (std::size_t i = 0; i < k; ++i) {
                    const double z1p = act.z1[i * kHidden1 + r] + delta;
                    const double dh1 = (z1p > 0.0 ? z1p : 0.0) - act.h1[i * kHidden1 + r];
                    if (dh1 == 0.0) continue;
                    for (std::size_t j = 0; j < kHidden2; ++j) {
                        const double z2p = act.z2[i * kHidden2 + j] +
                                           params[kW2 + j * kHidden1 + r] * dh1;
                        const double dh2 = (z2p > 0.0 ? z2p : 0.0) -
                                           act.h2[i * kHidden2 + j];
                        if (dh2 == 0.0) continue;
                        a_new[i] += params[kWa + j] * dh2;
                        v += params[kWv + j] * dh2 * inv_k;
                    }
                }
            } else if (idx < kB2) {               // W2[j][r]
                const std::size_t j = (idx - kW2) / kHidden1;
                const std::size_t r = (idx - kW2) % kHidden1;
                for (std::size_t i = 0; i < k; ++i) {
                    const double z2p = act.z2[i * kHidden2 + j] +
                                       delta * act.h1[i * kHidden1 + r];
                    const double dh2 = (z2p > 0.0 ? z2p : 0.0) - act.h2[i * kHidden2 + j];
                    if (dh2 == 0.0) continue;
                    a_new[i] += params[kWa + j] * dh2;
                    v += params[kWv + j] * dh2 * inv_k;
                }
            } else if (idx < kWa) {               // b2[j]
                const std::size_t j = idx - kB2;
                for (std::size_t i = 0; i < k; ++i) {
                    const double z2p = act.z2[i * kHidden2 + j] + delta;
                    const double dh2 = (z2p > 0.0 ? z2p : 0.0) - act.h2[i * kHidden2 + j];
                    if (dh2 == 0.0) continue;
                    a_new[i] += params[kWa + j] * dh2;
                    v += params[kWv + j] * dh2 * inv_k;
                }
            } else if (idx < kBa) {               // wa[f]
                const std::size_t f = idx - kWa;
                for (std::size_t i = 0; i < k; ++i)
                    a_new[i] += delta * act.h2[i * kHidden2 + f];
            } else if (idx == kBa) {              // ba: cancels in Q = v + a - mean(a)
                for (std::size_t i = 0; i < k; ++i) a_new[i] += delta;
            } else if (idx < kBv) {               // wv[f]
                v += delta * base_pool[b][idx - kWv] * inv_k;
            } else {                              // bv
                v += delta;
            }

            double mean_a = 0.0;
            for (std::size_t i = 0; i < k; ++i) mean_a += a_new[i];
            mean_a *= inv_k;
            double sloss = 0.0;
            for (std::size_t i = 0; i < k; ++i)
                sloss += huber(v + a_new[i] - mean_a - s.y[i], 1.0) * inv_k;
            loss += sloss * inv_b;
        }
        return loss;
    };

    const double h = 1e-5;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const double lp = loss_shifted(i, h);
        const double lm = loss_shifted(i, -h);
        const double numeric = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
        max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
    }
    return max_rel;
}

} // namespace coldrl
