#pragma once

#include "coldrl/dueling.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coldrl {

// Model file, all little-endian:
//   magic `CRLM` (4B), version u16, feature_count u8 (=6), reserved u8,
//   NormParams as 6 x (f32 mu, f32 sigma) + f32 clamp,
//   4 layers each as (u32 rows, u32 cols, rows*cols f32 row-major weights,
//   rows f32 bias) in order W1, W2, Wa, Wv,
//   CRC-32 (IEEE) of all preceding bytes.

enum class ModelIoError {
    bad_magic,
    version_mismatch,
    bad_feature_count,
    bad_shape,
    checksum_failure,
    truncated,
    io_failure,
};

class ModelError : public std::runtime_error {
public:
    ModelError(ModelIoError kind, const std::string& what)
        : std::runtime_error(what), kind(kind) {}
    ModelIoError kind;
};

std::vector<std::uint8_t> serialize_model(const DuelingModel& model);
DuelingModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const DuelingModel& model, const std::string& path);
DuelingModel load_model(const std::string& path);

} // namespace coldrl
