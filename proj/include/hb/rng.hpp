#pragma once

#include <cstdint>
#include <memory>

#include "hb/field.hpp"
#include "hb/radial.hpp"

namespace hb {

TensorField centered_gaussian(const TensorGrid& g, double width, double amplitude);
RadialField radial_gaussian(const std::shared_ptr<const RadialGrid>& g, double width,
                            double amplitude);

// Deterministic smooth positive bump mixture, supported well inside the box.
TensorField random_mixture(const TensorGrid& g, std::uint64_t seed, int bumps = 4);

}  // namespace hb
