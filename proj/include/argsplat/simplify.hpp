// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/gaussian.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace argsplat {

/// Gaussians paired with stable ids. Ids are unique within a set.
struct GaussianSet {
    std::vector<std::uint32_t> ids;
    std::vector<Gaussian3D> gaussians;

    std::size_t size() const noexcept { return ids.size(); }
    bool empty() const noexcept { return ids.empty(); }

    void add(std::uint32_t id, Gaussian3D g) {
        ids.push_back(id);
        gaussians.push_back(std::move(g));
    }

    /// Same set with entries ordered by ascending id.
    GaussianSet sortedById() const;

    bool operator==(const GaussianSet &) const = default;
};

struct SimplifyConfig {
    /// Partner distance is |u_i - u_j| / m0_j^beta.
    double beta = 0.0;
    /// Use the exhaustive O(n) partner scan instead of the spatial index.
    bool referenceScan = false;
    std::size_t leafSize = 8;
};

struct MergeRecord {
    std::uint32_t step = 0;
    std::uint32_t parentId = 0;
    std::uint32_t child1Id = 0;
    std::uint32_t child2Id = 0;
    Gaussian3D child1;
    Gaussian3D child2;
    Gaussian3D parent;

    bool operator==(const MergeRecord &) const = default;
};

/// Execution-ordered merge log. child1 is always the selected (smallest
/// det) Gaussian, child2 its nearest partner.
struct MergeSequence {
    std::vector<MergeRecord> records;
    std::uint32_t sourceCount = 0;

    bool operator==(const MergeSequence &) const = default;
};

struct SimplifyResult {
    MergeSequence sequence;
    /// Active set after the last merge, ordered by id.
    GaussianSet remaining;
    std::size_t opacityClamps = 0;
};

/// Shared distance kernel; the spatial index relies on this exact
/// evaluation order for its pruning bound.
inline double
centerDistance(const Vec3 &a, const Vec3 &b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt((dx * dx + dy * dy) + dz * dz);
}

/// Partner weight m0^beta (exactly 1 when beta == 0).
double partnerWeight(const Gaussian3D &g, double beta);

/// Exhaustive partner search over every member of `set` except the subject.
/// Ties resolve to the smaller id.
std::uint32_t nearestPartner(std::uint32_t subjectId, const GaussianSet &set,
                             const SimplifyConfig &config = {});

/// Merges until `targetCount` Gaussians remain. Each step takes the active
/// Gaussian with the smallest det(Sigma) (ties: smaller id) and merges it with
/// its nearest partner.
SimplifyResult simplify(const GaussianSet &set, std::size_t targetCount,
                        const SimplifyConfig &config = {});

/// Undoes the last `steps` records of `sequence`, starting from `roots`.
/// Output is ordered by id.
GaussianSet expand(const GaussianSet &roots, const MergeSequence &sequence, std::size_t steps);

} // namespace argsplat
