// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/gaussian.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace argsplat::detail {

/// Kd-style index over the live simplification slots. Supports insertion,
/// deletion marking and weighted nearest-partner queries; the owner rebuilds
/// it periodically to restore balance.
///
/// The index borrows the slot arrays; they may grow between calls but
/// existing entries must not change.
class PartnerIndex {
  public:
    PartnerIndex(const std::vector<Vec3> &centers, const std::vector<double> &weights,
                 const std::vector<std::uint32_t> &ids, std::size_t leafSize);

    void build(std::vector<std::size_t> slots);
    void insert(std::size_t slot);
    void remove(std::size_t slot);

    /// Live slot minimizing (distance / weight, id), excluding `subject`.
    /// Returns npos when no other slot is live.
    std::size_t nearest(std::size_t subject) const;

    std::size_t liveCount() const noexcept;

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  private:
    struct Node {
        Vec3 lo;
        Vec3 hi;
        double maxWeight = 0.0;
        std::size_t live = 0;
        int axis = -1; // -1 for leaves
        double split = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t parent = -1;
        std::vector<std::size_t> bucket;
    };

    std::int32_t buildRange(std::vector<std::size_t> &slots, std::size_t begin, std::size_t end,
                            std::int32_t parent);
    void extend(Node &node, std::size_t slot) const;

    struct Best {
        double distance = std::numeric_limits<double>::infinity();
        std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
        std::size_t slot = npos;
    };
    void search(std::int32_t node, std::size_t subject, Best &best) const;

    const std::vector<Vec3> &mCenters;
    const std::vector<double> &mWeights;
    const std::vector<std::uint32_t> &mIds;
    std::size_t mLeafSize;
    std::vector<Node> mNodes;
    std::vector<std::int32_t> mLeafOf; // slot -> leaf node, -1 when absent
};

} // namespace argsplat::detail
