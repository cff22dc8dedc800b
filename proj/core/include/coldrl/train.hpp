#pragma once

#include "coldrl/trajectory.hpp"

#include <cstdint>
#include <vector>

namespace coldrl {

struct TrainConfig {
    double gamma = 0.0;        // 0 = regression on the literal reward
    double epsilon = 0.2;      // behavior-policy LRU-mix rate (trajectory generation)
    std::size_t batch = 256;
    double lr = 1e-3;
    std::size_t epochs = 10;
    std::size_t target_sync = 1000;  // steps between target-net syncs (gamma > 0)
    std::uint64_t seed = 0;
    double huber_delta = 1.0;
    std::size_t k = 16;
    AblationMask ablate{};
};

struct TrainResult {
    DuelingModel model;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::size_t samples = 0;
    std::size_t steps = 0;
};

// Fits NormParams over all raw candidate features, then minimizes the mean
// Huber loss between Q_i and the target via Adam over uniformly sampled
// batches. Deterministic for a fixed seed (single-threaded, double math,
// cast to f32 only at the end).
TrainResult train(const std::vector<Trajectory>& trajectories, const TrainConfig& config);

// Seeded parameter init: uniform +-sqrt(6/(fan_in+fan_out)) weights, zero
// biases. Flat layout: W1, b1, W2, b2, Wa, ba, Wv, bv.
std::vector<double> init_params(std::uint64_t seed);

DuelingModel params_to_model(const std::vector<double>& params);
std::vector<double> model_to_params(const DuelingModel& model);

// The offline training pipeline: iterated generate_trajectories -> train.
// Iteration 0 explores from pure LRU; later iterations generate fresh
// trajectories under the improved policy (epsilon-mixed with LRU) and train
// on everything collected so far.
struct PipelineConfig {
    TrainConfig train;
    std::size_t iterations = 3;
};

struct PipelineResult {
    DuelingModel model;
    std::size_t decisions = 0;   // total decision samples collected
    double final_loss = 0.0;
};

// Throws when the replay produces no eviction decisions (capacity covers
// the working set).
PipelineResult train_pipeline(const Trace& trace, std::uint64_t capacity,
                              const PipelineConfig& config);

namespace detail {

// A prepared training sample: normalized (and ablated) inputs plus targets.
struct Sample {
    std::vector<double> x;   // K x 6 row-major
    std::vector<double> y;   // K
    std::size_t k = 0;
    std::ptrdiff_t next = -1;  // index of the next decision in the trajectory
};

// Mean-over-candidates Huber loss for one sample; accumulates dL/dparams
// into grad (scaled by `scale`) when grad != nullptr.
double sample_loss(const std::vector<double>& params, const Sample& sample,
                   double huber_delta, std::vector<double>* grad, double scale);

} // namespace detail

// Analytic gradients vs central finite differences (h = 1e-5) over every
// parameter, at double precision, on a synthetic random batch. Biases are
// nudged until no pre-activation sits near a ReLU kink. Returns the max
// relative error.
double grad_check(std::uint64_t seed, std::size_t k = 4, std::size_t batch_size = 8);

} // namespace coldrl
