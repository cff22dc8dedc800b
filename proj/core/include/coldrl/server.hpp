#pragma once

#include "coldrl/dueling.hpp"
#include "coldrl/protocol.hpp"

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace coldrl {

// The inference sidecar: a unix-domain-socket server answering EvictRequest
// with EvictResponse. The per-request path works off a preallocated scratch
// and an immutable model snapshot; hot swap publishes a new snapshot
// atomically without touching in-flight requests.
//
// Control protocol, on the same socket path: a line `SWAP <path>\n` replaces
// the model from a CRLM file; the server answers `OK\n` or `ERR <reason>\n`.
class SidecarServer {
public:
    SidecarServer(std::string socket_path, DuelingModel model);
    ~SidecarServer();

    SidecarServer(const SidecarServer&) = delete;
    SidecarServer& operator=(const SidecarServer&) = delete;

    // Binds and serves until stop(). Blocking.
    void run();
    // Binds and serves on a background thread; returns once accepting.
    void start();
    void stop();

    std::uint64_t requests_served() const { return requests_.load(); }

private:
    void accept_loop();
    void handle_connection(int fd);
    bool handle_request(int fd, std::span<const std::uint8_t> header);
    bool handle_control(int fd, std::string line);

    std::shared_ptr<const DuelingModel> snapshot() const;

    std::string path_;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> requests_{0};

    mutable std::mutex model_mu_;
    std::shared_ptr<const DuelingModel> model_;

    std::thread accept_thread_;
    std::mutex workers_mu_;
    std::vector<std::thread> workers_;
    std::vector<int> conn_fds_;  // open connections, for shutdown on stop()
};

} // namespace coldrl
