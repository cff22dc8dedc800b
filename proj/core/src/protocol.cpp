#include "coldrl/protocol.hpp"

#include <cstring>
#include <stdexcept>

namespace coldrl {

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float get_f32(const std::uint8_t* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

std::string_view to_string(ProtoError e) {
    switch (e) {
        case ProtoError::none: return "none";
        case ProtoError::bad_magic: return "bad magic";
        case ProtoError::bad_version: return "bad version";
        case ProtoError::bad_length: return "length mismatch";
        case ProtoError::k_out_of_range: return "K out of range";
    }
    return "unknown";
}

std::vector<std::uint8_t> encode_request(const EvictRequest& req) {
    if (req.k < 1 || req.k > kMaxK)
        throw std::invalid_argument("encode_request: K out of range");
    if (req.features.size() != static_cast<std::size_t>(req.k) * 6)
        throw std::invalid_argument("encode_request: feature count mismatch");
    std::vector<std::uint8_t> out;
    out.reserve(request_size(req.k));
    out.insert(out.end(), {'C', 'R', 'L', 'Q'});
    out.push_back(req.version);
    out.push_back(req.k);
    out.push_back(req.flags);
    out.push_back(0);  // reserved
    put_u64(out, req.needed_bytes);
    for (float f : req.features) put_f32(out, f);
    return out;
}

ProtoError decode_request(std::span<const std::uint8_t> bytes, EvictRequest& out) {
    if (bytes.size() < kRequestHeaderSize) return ProtoError::bad_length;
    if (std::memcmp(bytes.data(), "CRLQ", 4) != 0) return ProtoError::bad_magic;
    if (bytes[4] != kProtoVersion) return ProtoError::bad_version;
    const std::uint8_t k = bytes[5];
    if (k < 1 || k > kMaxK) return ProtoError::k_out_of_range;
    if (bytes.size() != request_size(k)) return ProtoError::bad_length;

    out.version = bytes[4];
    out.k = k;
    out.flags = bytes[6];
    out.needed_bytes = get_u64(bytes.data() + 8);
    out.features.resize(static_cast<std::size_t>(k) * 6);
    for (std::size_t i = 0; i < out.features.size(); ++i)
        out.features[i] = get_f32(bytes.data() + kRequestHeaderSize + i * 4);
    return ProtoError::none;
}

std::vector<std::uint8_t> encode_response(const EvictResponse& resp) {
    std::vector<std::uint8_t> out;
    out.reserve(kResponseSize);
    out.insert(out.end(), {'C', 'R', 'L', 'R'});
    out.push_back(resp.version);
    out.push_back(static_cast<std::uint8_t>(resp.status));
    out.push_back(0);  // reserved u16
    out.push_back(0);
    put_u64(out, resp.mask);
    return out;
}

ProtoError decode_response(std::span<const std::uint8_t> bytes, EvictResponse& out) {
    if (bytes.size() != kResponseSize) return ProtoError::bad_length;
    if (std::memcmp(bytes.data(), "CRLR", 4) != 0) return ProtoError::bad_magic;
    if (bytes[4] != kProtoVersion) return ProtoError::bad_version;
    out.version = bytes[4];
    out.status = static_cast<RespStatus>(bytes[5]);
    out.mask = get_u64(bytes.data() + 8);
    return ProtoError::none;
}

} // namespace coldrl
