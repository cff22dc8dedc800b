#include "coldrl/server.hpp"
#include "coldrl/model_io.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace coldrl {

namespace {

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        ssize_t r = ::read(fd, buf + got, n - got);
        if (r <= 0) {
            if (r < 0 && errno == EINTR) continue;
            return false;
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

bool write_all(int fd, const std::uint8_t* buf, std::size_t n) {
    std::size_t sent = 0;
    while (sent < n) {
        ssize_t r = ::write(fd, buf + sent, n - sent);
        if (r < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        sent += static_cast<std::size_t>(r);
    }
    return true;
}

// The wire carries pre-normalized features; candidate byte sizes are
// recovered from the size feature through the model's own normalization.
// Exact for any size below the clamp bound, which fitted constants put far
// beyond real object sizes.
std::uint64_t denormalize_size(float normalized, const NormParams& norm) {
    const double log1p_size = static_cast<double>(normalized) *
                                  norm.sigma[static_cast<std::size_t>(Feature::size)] +
                              norm.mu[static_cast<std::size_t>(Feature::size)];
    const double size = std::expm1(log1p_size);
    if (!(size > 0.0)) return 1;
    return static_cast<std::uint64_t>(std::llround(size));
}

} // namespace

SidecarServer::SidecarServer(std::string socket_path, DuelingModel model)
    : path_(std::move(socket_path)),
      model_(std::make_shared<const DuelingModel>(std::move(model))) {}

SidecarServer::~SidecarServer() { stop(); }

std::shared_ptr<const DuelingModel> SidecarServer::snapshot() const {
    std::lock_guard lock(model_mu_);
    return model_;
}

void SidecarServer::start() {
    ::unlink(path_.c_str());
    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("sidecar: socket() failed");

    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path_.size() >= sizeof(addr.sun_path))
        throw std::runtime_error("sidecar: socket path too long");
    std::strncpy(addr.sun_path, path_.c_str(), sizeof(addr.sun_path) - 1);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw std::runtime_error("sidecar: cannot bind '" + path_ + "': " +
                                 std::strerror(errno));
    if (::listen(listen_fd_, 64) != 0)
        throw std::runtime_error("sidecar: listen failed");

    accept_thread_ = std::thread([this] { accept_loop(); });
}

void SidecarServer::run() {
    start();
    accept_thread_.join();
}

void SidecarServer::stop() {
    if (stopping_.exchange(true)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (accept_thread_.joinable() &&
        accept_thread_.get_id() != std::this_thread::get_id())
        accept_thread_.join();
    std::vector<std::thread> workers;
    {
        // Kick workers out of blocking reads; they close their own fds.
        std::lock_guard lock(workers_mu_);
        for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
        workers.swap(workers_);
    }
    for (auto& w : workers)
        if (w.joinable()) w.join();
    ::unlink(path_.c_str());
}

void SidecarServer::accept_loop() {
    while (!stopping_.load()) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;  // listener closed
        }
        std::lock_guard lock(workers_mu_);
        conn_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { handle_connection(fd); });
    }
}

void SidecarServer::handle_connection(int fd) {
    std::uint8_t header[kRequestHeaderSize];
    while (!stopping_.load()) {
        if (!read_exact(fd, header, 4)) break;
        if (std::memcmp(header, "CRLQ", 4) == 0) {
            if (!read_exact(fd, header + 4, kRequestHeaderSize - 4)) break;
            if (!handle_request(fd, std::span(header, kRequestHeaderSize))) break;
        } else if (std::memcmp(header, "SWAP", 4) == 0) {
            std::string line;
            char c = 0;
            bool complete = false;
            while (::read(fd, &c, 1) == 1) {
                if (c == '\n') { complete = true; break; }
                line.push_back(c);
                if (line.size() > 4096) break;
            }
            if (!complete || !handle_control(fd, std::move(line))) break;
        } else {
            break;  // unknown magic: drop the connection, never guess framing
        }
    }
    {
        std::lock_guard lock(workers_mu_);
        std::erase(conn_fds_, fd);
    }
    ::close(fd);
}

bool SidecarServer::handle_request(int fd, std::span<const std::uint8_t> header) {
    thread_local std::vector<std::uint8_t> body(kMaxK * kBytesPerCandidate);
    thread_local EvictRequest req;
    thread_local ForwardScratch scratch;
    thread_local std::vector<float> q(kMaxK);
    thread_local std::vector<std::uint64_t> sizes(kMaxK);

    auto respond = [&](RespStatus status, std::uint64_t mask) {
        EvictResponse resp;
        resp.status = status;
        resp.mask = mask;
        auto bytes = encode_response(resp);
        return write_all(fd, bytes.data(), bytes.size());
    };

    const std::uint8_t k = header[5];
    if (k < 1 || k > kMaxK) return respond(RespStatus::bad_request, 0);
    const std::size_t body_len = static_cast<std::size_t>(k) * kBytesPerCandidate;
    if (!read_exact(fd, body.data(), body_len)) return false;

    thread_local std::vector<std::uint8_t> message(request_size(kMaxK));
    std::memcpy(message.data(), header.data(), kRequestHeaderSize);
    std::memcpy(message.data() + kRequestHeaderSize, body.data(), body_len);
    if (decode_request(std::span(message.data(), request_size(k)), req) != ProtoError::none)
        return respond(RespStatus::bad_request, 0);

    auto model = snapshot();
    if (!model) return respond(RespStatus::model_unavailable, 0);

    for (float f : req.features)
        if (!std::isfinite(f)) return respond(RespStatus::bad_request, 0);

    scratch.resize(req.k);
    forward(*model, req.features, req.k, std::span(q.data(), req.k), scratch);
    for (std::size_t i = 0; i < req.k; ++i)
        sizes[i] = denormalize_size(
            req.features[i * kFeatureCount + static_cast<std::size_t>(Feature::size)],
            model->norm);

    const std::uint64_t mask = select_mask(std::span<const float>(q.data(), req.k),
                                           std::span<const std::uint64_t>(sizes.data(), req.k),
                                           req.needed_bytes);
    requests_.fetch_add(1);
    return respond(RespStatus::ok, mask);
}

bool SidecarServer::handle_control(int fd, std::string line) {
    auto reply = [&](const std::string& msg) {
        return write_all(fd, reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size());
    };
    // line is everything after the 4-byte "SWAP" magic, e.g. " /path/model.crlm"
    if (line.empty() || line.front() != ' ') return reply("ERR usage: SWAP <path>\n");
    const std::string path = line.substr(1);
    try {
        auto fresh = std::make_shared<const DuelingModel>(load_model(path));
        std::lock_guard lock(model_mu_);
        model_ = std::move(fresh);
    } catch (const std::exception& e) {
        return reply(std::string("ERR ") + e.what() + "\n");
    }
    return reply("OK\n");
}

} // namespace coldrl
