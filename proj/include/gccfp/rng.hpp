#pragma once

#include <cstdint>
#include <random>

namespace gccfp {

// Uniform draw from (0, 1] built from the top 53 bits of the generator output.
// Bit-reproducible across platforms, unlike uniform_real_distribution, and
// never returns exact zero.
inline double uniform_unit(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

} // namespace gccfp
