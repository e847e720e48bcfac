#pragma once

// Small generators for tests, benchmarks and examples.

#include <cstdint>

#include "bsvm/data.hpp"

namespace bsvm::synthetic {

/// Two interleaved half circles with Gaussian noise; labels alternate.
Dataset two_moons(Index n, double noise, std::uint64_t seed);

/// Two isotropic Gaussian blobs in d dimensions centred at -/+ offset * 1.
Dataset blobs(Index n, Index d, double offset, double sd, std::uint64_t seed);

/// Breiman's waveform-21 generator reduced to two classes (class 0 vs the
/// other two).
Dataset waveform(Index n, std::uint64_t seed);

/// 2-D data separable with margin >= 1 by y = sign(x_1 + x_2).
Dataset separable(Index n, std::uint64_t seed);

/// Gaussian features with labels from a random linear rule plus 10% flips.
Dataset linear_gaussian(Index n, Index d, std::uint64_t seed);

}  // namespace bsvm::synthetic
