#include "coldrl/model_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace coldrl {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n) {
        if (remaining() < n)
            throw ModelError(ModelIoError::truncated, "model file truncated");
    }
    std::uint8_t u8() { need(1); return bytes_[pos_++]; }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

void put_layer(std::vector<std::uint8_t>& out, std::uint32_t rows, std::uint32_t cols,
               const std::vector<float>& weights, const std::vector<float>& bias) {
    put_u32(out, rows);
    put_u32(out, cols);
    for (float w : weights) put_f32(out, w);
    for (float b : bias) put_f32(out, b);
}

void read_layer(Reader& r, std::uint32_t rows, std::uint32_t cols,
                std::vector<float>& weights, std::vector<float>& bias) {
    if (r.u32() != rows || r.u32() != cols)
        throw ModelError(ModelIoError::bad_shape, "model file: unexpected layer shape");
    weights.resize(static_cast<std::size_t>(rows) * cols);
    bias.resize(rows);
    for (auto& w : weights) w = r.f32();
    for (auto& b : bias) b = r.f32();
}

} // namespace

std::vector<std::uint8_t> serialize_model(const DuelingModel& m) {
    std::vector<std::uint8_t> out;
    out.reserve(4 * kParamCount + 128);
    out.insert(out.end(), {'C', 'R', 'L', 'M'});
    put_u16(out, m.version);
    out.push_back(static_cast<std::uint8_t>(kFeatureCount));
    out.push_back(0);  // reserved
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        put_f32(out, m.norm.mu[j]);
        put_f32(out, m.norm.sigma[j]);
    }
    put_f32(out, m.norm.clamp);
    put_layer(out, kHidden1, kFeatureCount, m.w1, m.b1);
    put_layer(out, kHidden2, kHidden1, m.w2, m.b2);
    put_layer(out, 1, kHidden2, m.wa, m.ba);
    put_layer(out, 1, kHidden2, m.wv, m.bv);
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, out.data(), static_cast<uInt>(out.size())));
    put_u32(out, crc);
    return out;
}

DuelingModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    // Every shape is fixed, so the file size is a constant: header 8 +
    // norm 52 + four (rows, cols, weights, bias) layers + trailing CRC.
    constexpr std::size_t kFileSize =
        8 + (2 * kFeatureCount + 1) * 4 +
        (8 + (kHidden1 * kFeatureCount + kHidden1) * 4) +
        (8 + (kHidden2 * kHidden1 + kHidden2) * 4) +
        2 * (8 + (kHidden2 + 1) * 4) + 4;
    if (bytes.size() < kFileSize)
        throw ModelError(ModelIoError::truncated, "model file truncated");
    if (std::memcmp(bytes.data(), "CRLM", 4) != 0)
        throw ModelError(ModelIoError::bad_magic, "model file: bad magic");

    // Checksum covers everything before the trailing CRC.
    std::size_t body = bytes.size() - 4;
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
    std::uint32_t actual = static_cast<std::uint32_t>(
        crc32(0, bytes.data(), static_cast<uInt>(body)));

    Reader r(bytes);
    r.u32();  // magic, already checked
    DuelingModel m;
    m.version = r.u16();
    if (m.version != kModelVersion)
        throw ModelError(ModelIoError::version_mismatch,
                         "model file: unsupported version " + std::to_string(m.version));
    if (r.u8() != kFeatureCount)
        throw ModelError(ModelIoError::bad_feature_count, "model file: bad feature count");
    r.u8();  // reserved
    if (stored != actual)
        throw ModelError(ModelIoError::checksum_failure, "model file: checksum mismatch");
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        m.norm.mu[j] = r.f32();
        m.norm.sigma[j] = r.f32();
    }
    m.norm.clamp = r.f32();
    read_layer(r, kHidden1, kFeatureCount, m.w1, m.b1);
    read_layer(r, kHidden2, kHidden1, m.w2, m.b2);
    read_layer(r, 1, kHidden2, m.wa, m.ba);
    read_layer(r, 1, kHidden2, m.wv, m.bv);
    if (r.remaining() != 4)
        throw ModelError(ModelIoError::bad_shape, "model file: trailing bytes");
    return m;
}

void save_model(const DuelingModel& m, const std::string& path) {
    auto bytes = serialize_model(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError(ModelIoError::io_failure, "cannot open '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw ModelError(ModelIoError::io_failure, "write failure on '" + path + "'");
}

DuelingModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError(ModelIoError::io_failure, "cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace coldrl
