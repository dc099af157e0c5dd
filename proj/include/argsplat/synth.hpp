// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/simplify.hpp"

#include <cstdint>
#include <random>

namespace argsplat {

/// Seeded generator whose stream is identical on every platform
/// (std::mt19937_64 is fully specified; the distributions below are ours).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : mEngine(seed) {}

    std::uint64_t next() { return mEngine(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(mEngine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    /// Uniform random unit quaternion with w >= 0.
    Quat rotation();

  private:
    std::mt19937_64 mEngine;
    bool mHasSpare = false;
    double mSpare = 0.0;
};

struct SynthOptions {
    std::uint32_t count = 256;
    std::uint32_t clusters = 8;
    double minScale = 0.01;
    double maxScale = 0.06;
};

/// Clustered synthetic object: cluster centres uniform in [-1, 1]^3, members
/// normally scattered around them, log-uniform scales, random orientation.
/// Ids are 0..count-1.
GaussianSet synthesizeObject(std::uint64_t seed, const SynthOptions &options = {});

} // namespace argsplat

namespace argsplat {

/// Full merge sequence over `leaves` synthetic Gaussians where each step
/// merges a uniformly random pair of active nodes. Produces tree shapes the
/// det-ordered simplifier rarely does (deep chains, lopsided subtrees).
MergeSequence randomMergeSequence(std::uint64_t seed, std::uint32_t leaves);

} // namespace argsplat
