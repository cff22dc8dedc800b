#pragma once

#include "coldrl/coldrl_policy.hpp"
#include "coldrl/protocol.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace coldrl {

enum class ClientMode { active, shadow, off };

struct ClientConfig {
    std::string socket_path;
    double deadline_us = 500.0;
    int breaker_threshold = 5;         // consecutive failures before opening
    double breaker_cooldown_s = 10.0;
    ClientMode mode = ClientMode::active;
    int rollout_percent = 100;
    std::size_t k = 16;
};

enum class BreakerState { closed, open, half_open };

std::string_view to_string(BreakerState s);

// closed -> open after exactly F consecutive failures; open -> half_open
// once the cooldown elapses; half_open recloses on one success and reopens
// on one failure. Time is injected for testability.
class CircuitBreaker {
public:
    CircuitBreaker(int threshold, double cooldown_s)
        : threshold_(threshold), cooldown_s_(cooldown_s) {}

    // True when an IPC attempt is permitted at `now`. Transitions
    // open -> half_open as a side effect when the cooldown has elapsed.
    bool allow(double now_s);
    void on_success();
    void on_failure(double now_s);

    BreakerState state() const { return state_; }
    int consecutive_failures() const { return failures_; }

private:
    int threshold_;
    double cooldown_s_;
    BreakerState state_ = BreakerState::closed;
    int failures_ = 0;
    double opened_at_ = 0.0;
};

struct Decision {
    std::vector<std::string> victims;
    DecisionSource source = DecisionSource::learned;
    double latency_us = 0.0;
    std::uint64_t learned_mask = 0;  // recorded even when not applied
};

struct LatencyReport {
    double p50_us = 0.0;
    double p95_us = 0.0;
    double p99_us = 0.0;
    double fallback_rate = 0.0;
    std::size_t decisions = 0;
};

LatencyReport latency_report(const std::vector<Decision>& decisions);

// One persistent connection to the sidecar, re-established on demand.
// Every request is bounded by the configured deadline; a timeout poisons
// the connection (a late reply must never desync framing).
class SidecarClient {
public:
    explicit SidecarClient(ClientConfig config);
    ~SidecarClient();

    SidecarClient(const SidecarClient&) = delete;
    SidecarClient& operator=(const SidecarClient&) = delete;

    enum class Outcome { ok, timeout, error };

    Outcome request_mask(std::uint8_t k, std::uint64_t needed,
                         std::span<const float> features, bool shadow,
                         std::uint64_t& mask_out, double& latency_us);

    // The deadline-bounded decision path with every safety mechanism:
    // kill switch / rollout lottery / breaker / timeout fallback / shadow.
    // Never blocks meaningfully past the deadline; every failure maps to
    // the exact LRU victim set.
    Decision decide(const CacheState& state, const std::vector<Candidate>& candidates,
                    std::uint64_t needed, const NormParams& norm,
                    const AblationMask& ablate = {});

    const ClientConfig& config() const { return config_; }
    CircuitBreaker& breaker() { return breaker_; }

private:
    bool connect_now();
    void drop_connection();

    ClientConfig config_;
    CircuitBreaker breaker_;
    int fd_ = -1;
    std::uint64_t event_counter_ = 0;
};

// EvictionPolicy adapter: K-tail candidates through SidecarClient::decide.
class SidecarPolicy : public EvictionPolicy {
public:
    SidecarPolicy(ClientConfig config, NormParams norm, AblationMask ablate = {});

    std::string_view name() const override { return "sidecar"; }
    std::vector<std::string> select_victims(const CacheState&, std::uint64_t needed) override;

    const std::vector<Decision>& decisions() const { return decisions_; }
    SidecarClient& client() { return client_; }

private:
    SidecarClient client_;
    NormParams norm_;
    AblationMask ablate_;
    std::vector<Decision> decisions_;
};

} // namespace coldrl
