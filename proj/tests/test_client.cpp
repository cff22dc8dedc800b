#include <coldrl/client.hpp>
#include <coldrl/coldrl_policy.hpp>
#include <coldrl/policies.hpp>
#include <coldrl/server.hpp>
#include <coldrl/train.hpp>

#include <doctest.h>

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

using namespace coldrl;

namespace {

std::string unique_socket_path() {
    static int counter = 0;
    return "/tmp/coldrl_client_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++) + ".sock";
}

// Five entries admitted oldest-first so the recency tail is e0..e4 with e0
// coldest. Sizes 100, 200, 300, 400, 500.
CacheState small_state() {
    CacheState state(1 << 20);
    for (int i = 0; i < 5; ++i) {
        state.advance_clock(static_cast<double>(i));
        CacheEntry e;
        e.key = "e" + std::to_string(i);
        e.size = 100 * static_cast<std::uint64_t>(i + 1);
        e.inserted_at = state.now();
        e.last_access = state.now();
        e.expires_at = 1e9;
        e.origin_rtt = 5.0;
        state.admit(e);
    }
    state.advance_clock(10.0);
    return state;
}

// Accepts connections and never answers, so every request runs into the
// client deadline.
class SilentServer {
public:
    explicit SilentServer(std::string path) : path_(std::move(path)) {
        fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
        REQUIRE(fd_ >= 0);
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        std::strncpy(addr.sun_path, path_.c_str(), sizeof(addr.sun_path) - 1);
        ::unlink(path_.c_str());
        REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
        REQUIRE(::listen(fd_, 16) == 0);
        thread_ = std::thread([this] {
            while (true) {
                int c = ::accept(fd_, nullptr, nullptr);
                if (c < 0) break;
                clients_.push_back(c);
            }
        });
    }
    ~SilentServer() {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        thread_.join();
        for (int c : clients_) ::close(c);
        ::unlink(path_.c_str());
    }

private:
    std::string path_;
    int fd_;
    std::thread thread_;
    std::vector<int> clients_;
};

} // namespace

TEST_CASE("breaker: exact transition trace with injected time") {
    CircuitBreaker b(3, 5.0);
    CHECK(b.state() == BreakerState::closed);
    CHECK(b.allow(0.0));

    b.on_failure(0.0);
    b.on_failure(1.0);
    CHECK(b.state() == BreakerState::closed);
    CHECK(b.consecutive_failures() == 2);
    CHECK(b.allow(1.5));

    b.on_failure(2.0);  // third consecutive failure opens the breaker
    CHECK(b.state() == BreakerState::open);
    CHECK(!b.allow(2.0));
    CHECK(!b.allow(6.999));

    CHECK(b.allow(7.0));  // cooldown elapsed: probe permitted
    CHECK(b.state() == BreakerState::half_open);

    b.on_failure(7.0);  // failed probe reopens immediately
    CHECK(b.state() == BreakerState::open);
    CHECK(!b.allow(11.999));
    CHECK(b.allow(12.0));
    CHECK(b.state() == BreakerState::half_open);

    b.on_success();  // successful probe recloses and clears the count
    CHECK(b.state() == BreakerState::closed);
    CHECK(b.consecutive_failures() == 0);
    CHECK(b.allow(12.0));

    // A success between failures resets the consecutive count.
    b.on_failure(13.0);
    b.on_failure(13.5);
    b.on_success();
    b.on_failure(14.0);
    b.on_failure(14.5);
    CHECK(b.state() == BreakerState::closed);
    b.on_failure(15.0);
    CHECK(b.state() == BreakerState::open);
}

TEST_CASE("latency_report: nearest-rank percentiles over hand data") {
    std::vector<Decision> d(10);
    for (int i = 0; i < 10; ++i) {
        d[static_cast<std::size_t>(i)].latency_us = static_cast<double>((i + 1) * 10);
        d[static_cast<std::size_t>(i)].source = DecisionSource::learned;
    }
    d[3].source = DecisionSource::fallback_timeout;
    d[7].source = DecisionSource::shadow;  // shadow is a served decision, not a fallback

    auto r = latency_report(d);
    CHECK(r.decisions == 10);
    CHECK(r.p50_us == doctest::Approx(50.0));   // ceil(0.50*10) = 5th of 10..100
    CHECK(r.p95_us == doctest::Approx(100.0));  // ceil(0.95*10) = 10th
    CHECK(r.p99_us == doctest::Approx(100.0));
    CHECK(r.fallback_rate == doctest::Approx(0.1));

    CHECK_THROWS_AS(latency_report({}), std::invalid_argument);
}

TEST_CASE("client: dead socket falls back to the exact LRU victims") {
    auto state = small_state();
    auto candidates = k_tail_candidates(state, 4);
    NormParams norm;

    ClientConfig cfg;
    cfg.socket_path = "/tmp/coldrl_client_test_no_such_socket.sock";
    cfg.breaker_threshold = 3;
    cfg.breaker_cooldown_s = 1000.0;  // keep it open for the whole test
    SidecarClient client(cfg);

    // needed = 250 -> LRU takes e0 (100) + e1 (200).
    for (int i = 0; i < 3; ++i) {
        auto d = client.decide(state, candidates, 250, norm);
        CHECK(d.source == DecisionSource::fallback_error);
        REQUIRE(d.victims == std::vector<std::string>{"e0", "e1"});
        CHECK(d.victims == lru_victims(state, 250));
    }
    CHECK(client.breaker().state() == BreakerState::open);

    // Breaker now open: the fallback reason changes but the victims do not.
    auto d = client.decide(state, candidates, 250, norm);
    CHECK(d.source == DecisionSource::fallback_breaker);
    CHECK(d.victims == lru_victims(state, 250));
}

TEST_CASE("client: silent server trips the deadline") {
    const std::string path = unique_socket_path();
    SilentServer server(path);

    auto state = small_state();
    auto candidates = k_tail_candidates(state, 4);
    NormParams norm;

    ClientConfig cfg;
    cfg.socket_path = path;
    cfg.deadline_us = 2000.0;  // short but not flaky
    SidecarClient client(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    auto d = client.decide(state, candidates, 150, norm);
    const double took_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    CHECK(d.source == DecisionSource::fallback_timeout);
    CHECK(d.victims == lru_victims(state, 150));
    CHECK(took_ms < 500.0);  // bounded: nothing waits for the server
    CHECK(client.breaker().consecutive_failures() == 1);
}

TEST_CASE("client: kill switch and rollout lottery bypass the IPC entirely") {
    auto state = small_state();
    auto candidates = k_tail_candidates(state, 4);
    NormParams norm;

    SUBCASE("mode off") {
        ClientConfig cfg;
        cfg.socket_path = "/tmp/never-dialed.sock";
        cfg.mode = ClientMode::off;
        SidecarClient client(cfg);
        auto d = client.decide(state, candidates, 100, norm);
        CHECK(d.source == DecisionSource::fallback_rollout);
        CHECK(d.victims == lru_victims(state, 100));
        CHECK(client.breaker().consecutive_failures() == 0);  // not an IPC failure
    }
    SUBCASE("rollout 0 percent") {
        ClientConfig cfg;
        cfg.socket_path = "/tmp/never-dialed.sock";
        cfg.rollout_percent = 0;
        SidecarClient client(cfg);
        for (int i = 0; i < 50; ++i) {
            auto d = client.decide(state, candidates, 100, norm);
            CHECK(d.source == DecisionSource::fallback_rollout);
        }
    }
    SUBCASE("rollout 50 percent routes roughly half of decisions") {
        const std::string path = unique_socket_path();
        SidecarServer server(path, DuelingModel::zeros());
        server.start();
        ClientConfig cfg;
        cfg.socket_path = path;
        cfg.deadline_us = 50000;
        cfg.rollout_percent = 50;
        SidecarClient client(cfg);
        int learned = 0;
        for (int i = 0; i < 400; ++i) {
            auto d = client.decide(state, candidates, 100, norm);
            if (d.source == DecisionSource::learned) ++learned;
            else CHECK(d.source == DecisionSource::fallback_rollout);
        }
        CHECK(learned > 120);
        CHECK(learned < 280);
        server.stop();
    }
}

TEST_CASE("client: shadow mode applies LRU while recording the learned mask") {
    const std::string path = unique_socket_path();
    SidecarServer server(path, params_to_model(init_params(3)));
    server.start();

    auto state = small_state();
    auto candidates = k_tail_candidates(state, 4);
    NormParams norm;

    ClientConfig cfg;
    cfg.socket_path = path;
    cfg.deadline_us = 50000;
    cfg.mode = ClientMode::shadow;
    SidecarClient client(cfg);

    auto d = client.decide(state, candidates, 250, norm);
    CHECK(d.source == DecisionSource::shadow);
    CHECK(d.victims == lru_victims(state, 250));
    CHECK(d.learned_mask != 0);
    CHECK((d.learned_mask >> candidates.size()) == 0);
    CHECK(client.breaker().state() == BreakerState::closed);
    server.stop();
}

TEST_CASE("client: active mode applies the served mask and tops up with LRU") {
    const std::string path = unique_socket_path();
    SidecarServer server(path, DuelingModel::zeros());
    server.start();

    auto state = small_state();
    auto candidates = k_tail_candidates(state, 4);  // e0..e3, sizes 100..400
    NormParams norm;

    ClientConfig cfg;
    cfg.socket_path = path;
    cfg.deadline_us = 50000;
    SidecarClient client(cfg);

    // The zeros model ties every Q, so the greedy pick walks candidate
    // indices in order. The server recovers sizes from the normalized size
    // feature, so the mask covers `needed` with real byte sizes.
    auto d = client.decide(state, candidates, 250, norm);
    CHECK(d.source == DecisionSource::learned);
    REQUIRE(d.victims == std::vector<std::string>{"e0", "e1"});
    CHECK(d.learned_mask == 0b11);
    CHECK(d.latency_us > 0.0);
    server.stop();
}

TEST_CASE("client: SidecarPolicy runs a whole simulation against the server") {
    const std::string path = unique_socket_path();
    SidecarServer server(path, params_to_model(init_params(21)));
    server.start();

    ClientConfig cfg;
    cfg.socket_path = path;
    cfg.deadline_us = 50000;
    cfg.k = 8;

    // Feed the policy by hand: admit entries past capacity and make sure
    // every eviction decision is served (no fallbacks against a healthy
    // local server with a lax deadline).
    NormParams norm;
    SidecarPolicy policy(cfg, norm);
    CacheState state(1000);
    for (int i = 0; i < 50; ++i) {
        state.advance_clock(static_cast<double>(i));
        CacheEntry e;
        e.key = "k" + std::to_string(i);
        e.size = 100;
        e.inserted_at = state.now();
        e.last_access = state.now();
        e.expires_at = 1e9;
        e.origin_rtt = 1.0;
        if (state.used() + e.size > state.capacity()) {
            auto victims = policy.select_victims(state, e.size - (state.capacity() - state.used()));
            REQUIRE(!victims.empty());
            std::uint64_t freed = 0;
            for (const auto& v : victims) {
                freed += state.entry(v).size;
                state.remove(v);
            }
            REQUIRE(freed >= e.size);
        }
        state.admit(e);
        REQUIRE(state.audit());
    }
    REQUIRE(policy.decisions().size() == 40);
    for (const auto& d : policy.decisions())
        CHECK(d.source == DecisionSource::learned);
    server.stop();
}
