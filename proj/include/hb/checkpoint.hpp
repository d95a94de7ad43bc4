#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hb/field.hpp"
#include "hb/radial.hpp"

namespace hb {

inline constexpr std::uint8_t kCheckpointTensor = 0;
inline constexpr std::uint8_t kCheckpointRadial = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Exponents ride along in the header so `verify` can rebuild the kernels.
void save_checkpoint(const std::string& path, const TensorField& u, double gamma1, double gamma2);
void save_checkpoint(const std::string& path, const RadialField& u, double gamma1, double gamma2);

struct LoadedCheckpoint {
    std::uint8_t kind;
    double gamma1, gamma2;
    std::optional<TensorField> tensor;
    std::optional<RadialField> radial;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace hb
