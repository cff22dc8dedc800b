#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace coldrl {

inline constexpr std::uint8_t kProtoVersion = 1;
inline constexpr std::size_t kMaxK = 64;
inline constexpr std::size_t kRequestHeaderSize = 16;   // magic..needed_bytes
inline constexpr std::size_t kResponseSize = 16;
inline constexpr std::size_t kBytesPerCandidate = 24;   // 6 x f32

// Request, little-endian: magic `CRLQ` (4B), version u8, K u8, flags u8
// (bit0 = shadow), reserved u8, needed_bytes u64, then K x 6 f32 normalized
// features, candidate-major in the fixed feature order. For K=8 the feature
// block is exactly 192 bytes.
struct EvictRequest {
    std::uint8_t version = kProtoVersion;
    std::uint8_t k = 0;
    std::uint8_t flags = 0;
    std::uint64_t needed_bytes = 0;
    std::vector<float> features;  // K x 6

    bool shadow() const { return (flags & 0x01) != 0; }
};

enum class RespStatus : std::uint8_t {
    ok = 0,
    model_unavailable = 1,
    bad_request = 2,
};

// Response, fixed 16 bytes: magic `CRLR` (4B), version u8, status u8,
// reserved u16, mask u64 (bit i => evict candidate i).
struct EvictResponse {
    std::uint8_t version = kProtoVersion;
    RespStatus status = RespStatus::ok;
    std::uint64_t mask = 0;
};

enum class ProtoError {
    none,
    bad_magic,
    bad_version,
    bad_length,
    k_out_of_range,
};

std::string_view to_string(ProtoError e);

constexpr std::size_t request_size(std::size_t k) {
    return kRequestHeaderSize + k * kBytesPerCandidate;
}

std::vector<std::uint8_t> encode_request(const EvictRequest& req);
ProtoError decode_request(std::span<const std::uint8_t> bytes, EvictRequest& out);

std::vector<std::uint8_t> encode_response(const EvictResponse& resp);
ProtoError decode_response(std::span<const std::uint8_t> bytes, EvictResponse& out);

} // namespace coldrl
