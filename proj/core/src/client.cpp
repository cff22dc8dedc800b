#include "coldrl/client.hpp"
#include "coldrl/rng.hpp"
#include "coldrl/sim.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace coldrl {

std::string_view to_string(BreakerState s) {
    switch (s) {
        case BreakerState::closed: return "closed";
        case BreakerState::open: return "open";
        case BreakerState::half_open: return "half_open";
    }
    return "unknown";
}

bool CircuitBreaker::allow(double now_s) {
    switch (state_) {
        case BreakerState::closed:
        case BreakerState::half_open:
            return true;
        case BreakerState::open:
            if (now_s - opened_at_ >= cooldown_s_) {
                state_ = BreakerState::half_open;
                return true;
            }
            return false;
    }
    return true;
}

void CircuitBreaker::on_success() {
    state_ = BreakerState::closed;
    failures_ = 0;
}

void CircuitBreaker::on_failure(double now_s) {
    if (state_ == BreakerState::half_open) {
        state_ = BreakerState::open;
        opened_at_ = now_s;
        return;
    }
    failures_ += 1;
    if (failures_ >= threshold_) {
        state_ = BreakerState::open;
        opened_at_ = now_s;
    }
}

LatencyReport latency_report(const std::vector<Decision>& decisions) {
    if (decisions.empty())
        throw std::invalid_argument("latency_report: no decisions");
    std::vector<double> lat;
    lat.reserve(decisions.size());
    std::size_t fallbacks = 0;
    for (const auto& d : decisions) {
        lat.push_back(d.latency_us);
        if (d.source != DecisionSource::learned && d.source != DecisionSource::shadow)
            fallbacks += 1;
    }
    LatencyReport r;
    r.p50_us = nearest_rank_percentile(lat, 50);
    r.p95_us = nearest_rank_percentile(lat, 95);
    r.p99_us = nearest_rank_percentile(lat, 99);
    r.fallback_rate = static_cast<double>(fallbacks) / static_cast<double>(decisions.size());
    r.decisions = decisions.size();
    return r;
}

namespace {

double steady_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

SidecarClient::SidecarClient(ClientConfig config)
    : config_(std::move(config)),
      breaker_(config_.breaker_threshold, config_.breaker_cooldown_s) {}

SidecarClient::~SidecarClient() { drop_connection(); }

void SidecarClient::drop_connection() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

bool SidecarClient::connect_now() {
    if (fd_ >= 0) return true;
    fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_NONBLOCK, 0);
    if (fd_ < 0) return false;
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (config_.socket_path.size() >= sizeof(addr.sun_path)) {
        drop_connection();
        return false;
    }
    std::strncpy(addr.sun_path, config_.socket_path.c_str(), sizeof(addr.sun_path) - 1);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 &&
        errno != EINPROGRESS) {
        drop_connection();
        return false;
    }
    return true;
}

SidecarClient::Outcome SidecarClient::request_mask(std::uint8_t k, std::uint64_t needed,
                                                   std::span<const float> features,
                                                   bool shadow, std::uint64_t& mask_out,
                                                   double& latency_us) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_us = [&] {
        return std::chrono::duration<double, std::micro>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };
    auto finish = [&](Outcome o) {
        latency_us = elapsed_us();
        if (o != Outcome::ok) drop_connection();
        return o;
    };

    if (!connect_now()) return finish(Outcome::error);

    EvictRequest req;
    req.k = k;
    req.flags = shadow ? 0x01 : 0x00;
    req.needed_bytes = needed;
    req.features.assign(features.begin(), features.end());
    std::vector<std::uint8_t> wire;
    try {
        wire = encode_request(req);
    } catch (const std::exception&) {
        return finish(Outcome::error);
    }

    // Non-blocking send+receive bounded by the deadline.
    std::size_t sent = 0;
    while (sent < wire.size()) {
        ssize_t r = ::send(fd_, wire.data() + sent, wire.size() - sent, MSG_NOSIGNAL);
        if (r > 0) {
            sent += static_cast<std::size_t>(r);
            continue;
        }
        if (r < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINPROGRESS ||
                      errno == ENOTCONN)) {
            const double remaining = config_.deadline_us - elapsed_us();
            if (remaining <= 0) return finish(Outcome::timeout);
            pollfd pfd{fd_, POLLOUT, 0};
            int pr = ::poll(&pfd, 1, std::max(1, static_cast<int>(remaining / 1000.0)));
            if (pr < 0 && errno != EINTR) return finish(Outcome::error);
            if (pfd.revents & (POLLERR | POLLHUP)) return finish(Outcome::error);
            continue;
        }
        if (r < 0 && errno == EINTR) continue;
        return finish(Outcome::error);
    }

    std::uint8_t resp_buf[kResponseSize];
    std::size_t got = 0;
    while (got < kResponseSize) {
        ssize_t r = ::recv(fd_, resp_buf + got, kResponseSize - got, 0);
        if (r > 0) {
            got += static_cast<std::size_t>(r);
            continue;
        }
        if (r == 0) return finish(Outcome::error);  // peer closed
        if (errno == EAGAIN || errno == EWOULDBLOCK) {
            const double remaining = config_.deadline_us - elapsed_us();
            if (remaining <= 0) return finish(Outcome::timeout);
            pollfd pfd{fd_, POLLIN, 0};
            int pr = ::poll(&pfd, 1, std::max(1, static_cast<int>(remaining / 1000.0)));
            if (pr < 0 && errno != EINTR) return finish(Outcome::error);
            continue;
        }
        if (errno == EINTR) continue;
        return finish(Outcome::error);
    }

    EvictResponse resp;
    if (decode_response(std::span(resp_buf, kResponseSize), resp) != ProtoError::none)
        return finish(Outcome::error);
    if (resp.status != RespStatus::ok) return finish(Outcome::error);
    // Mask bits at or above K mean the server disagrees about the candidate
    // list; treat as a protocol error, never apply a partial mask.
    if (k < 64 && (resp.mask >> k) != 0) return finish(Outcome::error);

    mask_out = resp.mask;
    latency_us = elapsed_us();
    return Outcome::ok;
}

Decision SidecarClient::decide(const CacheState& state,
                               const std::vector<Candidate>& candidates,
                               std::uint64_t needed, const NormParams& norm,
                               const AblationMask& ablate) {
    const std::uint64_t event = event_counter_++;
    Decision d;

    auto lru_fallback = [&](DecisionSource source) {
        d.victims = lru_victims(state, needed);
        d.source = source;
        return d;
    };

    if (config_.mode == ClientMode::off)
        return lru_fallback(DecisionSource::fallback_rollout);
    // Rollout lottery hashes the decision counter so the percentage applies
    // uniformly over decisions.
    std::uint64_t h = event;
    if (static_cast<int>(splitmix64(h) % 100) >=
        std::clamp(config_.rollout_percent, 0, 100))
        return lru_fallback(DecisionSource::fallback_rollout);

    if (!breaker_.allow(steady_seconds()))
        return lru_fallback(DecisionSource::fallback_breaker);

    if (candidates.empty()) return lru_fallback(DecisionSource::fallback_error);

    std::vector<float> features = normalized_rows(candidates, norm, ablate);
    std::uint64_t mask = 0;
    double latency_us = 0.0;
    const bool shadow = config_.mode == ClientMode::shadow;
    const Outcome outcome =
        request_mask(static_cast<std::uint8_t>(candidates.size()), needed, features,
                     shadow, mask, latency_us);
    d.latency_us = latency_us;

    if (outcome != Outcome::ok) {
        breaker_.on_failure(steady_seconds());
        lru_fallback(outcome == Outcome::timeout ? DecisionSource::fallback_timeout
                                                 : DecisionSource::fallback_error);
        return d;
    }

    breaker_.on_success();
    d.learned_mask = mask;
    if (shadow) {
        // Counterfactual only: the applied outcome is pure LRU.
        lru_fallback(DecisionSource::shadow);
        return d;
    }

    d.source = DecisionSource::learned;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (mask & (std::uint64_t{1} << i)) d.victims.push_back(candidates[i].key);
    extend_with_lru(state, needed, d.victims);
    return d;
}

SidecarPolicy::SidecarPolicy(ClientConfig config, NormParams norm, AblationMask ablate)
    : client_(std::move(config)), norm_(norm), ablate_(ablate) {}

std::vector<std::string> SidecarPolicy::select_victims(const CacheState& state,
                                                       std::uint64_t needed) {
    auto candidates = k_tail_candidates(state, client_.config().k);
    Decision d = client_.decide(state, candidates, needed, norm_, ablate_);

    last_ = DecisionInfo{};
    last_.source = d.source;
    last_.learned_mask = d.learned_mask;
    last_.ipc_latency_us = d.latency_us;
    decisions_.push_back(d);
    return d.victims;
}

} // namespace coldrl
