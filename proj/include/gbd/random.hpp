#pragma once

#include "gbd/types.hpp"

#include <cstdint>
#include <random>

namespace gbd {

/// Derives an independent stream seed from (seed, stream) with splitmix64
/// finalisation, so parallel tasks get reproducible generators by index.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(split_seed(seed, stream)); }

/// Uniform point in [0,1)^d.
Vec uniform_in_unit_cube(Rng& rng, int d);

/// Haar-distributed rotation in SO(d).
Mat haar_rotation(Rng& rng, int d);

}  // namespace gbd
