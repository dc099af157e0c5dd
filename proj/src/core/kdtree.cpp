// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "kdtree.hpp"

#include "argsplat/simplify.hpp"

#include <algorithm>
#include <cassert>

namespace argsplat::detail {

namespace {

// Must mirror centerDistance() term for term so that the box bound never
// exceeds the distance to any point inside the box.
double
boxDistance(const Vec3 &p, const Vec3 &lo, const Vec3 &hi) {
    double d[3];
    for (int i = 0; i < 3; ++i) {
        if (p[i] < lo[i]) {
            d[i] = p[i] - lo[i];
        } else if (p[i] > hi[i]) {
            d[i] = p[i] - hi[i];
        } else {
            d[i] = 0.0;
        }
    }
    return std::sqrt((d[0] * d[0] + d[1] * d[1]) + d[2] * d[2]);
}

} // namespace

PartnerIndex::PartnerIndex(const std::vector<Vec3> &centers, const std::vector<double> &weights,
                           const std::vector<std::uint32_t> &ids, std::size_t leafSize)
    : mCenters(centers), mWeights(weights), mIds(ids), mLeafSize(std::max<std::size_t>(leafSize, 1)) {}

void
PartnerIndex::extend(Node &node, std::size_t slot) const {
    const Vec3 &c = mCenters[slot];
    node.lo       = node.lo.cwiseMin(c);
    node.hi       = node.hi.cwiseMax(c);
    node.maxWeight = std::max(node.maxWeight, mWeights[slot]);
}

void
PartnerIndex::build(std::vector<std::size_t> slots) {
    mNodes.clear();
    mLeafOf.assign(mCenters.size(), -1);
    // Deterministic input order independent of caller history.
    std::sort(slots.begin(), slots.end());
    if (slots.empty()) {
        Node root;
        root.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        root.hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
        mNodes.push_back(std::move(root));
        return;
    }
    mNodes.reserve(2 * slots.size() / mLeafSize + 2);
    buildRange(slots, 0, slots.size(), -1);
}

std::int32_t
PartnerIndex::buildRange(std::vector<std::size_t> &slots, std::size_t begin, std::size_t end,
                         std::int32_t parent) {
    const auto index = static_cast<std::int32_t>(mNodes.size());
    mNodes.emplace_back();
    {
        Node &node     = mNodes.back();
        node.parent    = parent;
        node.live      = end - begin;
        node.lo        = Vec3::Constant(std::numeric_limits<double>::infinity());
        node.hi        = Vec3::Constant(-std::numeric_limits<double>::infinity());
        for (std::size_t i = begin; i < end; ++i) {
            extend(node, slots[i]);
        }
    }

    if (end - begin <= mLeafSize) {
        Node &node = mNodes[index];
        node.bucket.assign(slots.begin() + begin, slots.begin() + end);
        for (std::size_t s : node.bucket) {
            mLeafOf[s] = index;
        }
        return index;
    }

    const Vec3 extent = mNodes[index].hi - mNodes[index].lo;
    int axis          = 0;
    if (extent[1] > extent[axis]) axis = 1;
    if (extent[2] > extent[axis]) axis = 2;

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(slots.begin() + begin, slots.begin() + mid, slots.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                         const double ca = mCenters[a][axis];
                         const double cb = mCenters[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    const double split = mCenters[slots[mid]][axis];

    const std::int32_t left  = buildRange(slots, begin, mid, index);
    const std::int32_t right = buildRange(slots, mid, end, index);
    Node &node  = mNodes[index];
    node.axis   = axis;
    node.split  = split;
    node.left   = left;
    node.right  = right;
    return index;
}

void
PartnerIndex::insert(std::size_t slot) {
    if (mLeafOf.size() < mCenters.size()) {
        mLeafOf.resize(mCenters.size(), -1);
    }
    std::int32_t cur = 0;
    while (true) {
        Node &node = mNodes[cur];
        extend(node, slot);
        ++node.live;
        if (node.axis < 0) {
            node.bucket.push_back(slot);
            mLeafOf[slot] = cur;
            return;
        }
        cur = mCenters[slot][node.axis] < node.split ? node.left : node.right;
    }
}

void
PartnerIndex::remove(std::size_t slot) {
    assert(slot < mLeafOf.size() && mLeafOf[slot] >= 0);
    std::int32_t cur = mLeafOf[slot];
    auto &bucket     = mNodes[cur].bucket;
    bucket.erase(std::find(bucket.begin(), bucket.end(), slot));
    mLeafOf[slot] = -1;
    // Boxes and weight bounds stay conservative until the next rebuild.
    for (; cur >= 0; cur = mNodes[cur].parent) {
        --mNodes[cur].live;
    }
}

std::size_t
PartnerIndex::liveCount() const noexcept {
    return mNodes.empty() ? 0 : mNodes.front().live;
}

std::size_t
PartnerIndex::nearest(std::size_t subject) const {
    Best best;
    if (!mNodes.empty()) {
        search(0, subject, best);
    }
    return best.slot;
}

void
PartnerIndex::search(std::int32_t index, std::size_t subject, Best &best) const {
    const Node &node = mNodes[index];
    if (node.live == 0) {
        return;
    }
    const Vec3 &p = mCenters[subject];
    const double bound = boxDistance(p, node.lo, node.hi) / node.maxWeight;
    // Strict comparison keeps equal-distance candidates reachable for the id tie-break.
    if (bound > best.distance) {
        return;
    }
    if (node.axis < 0) {
        for (std::size_t s : node.bucket) {
            if (s == subject) {
                continue;
            }
            const double d = centerDistance(p, mCenters[s]) / mWeights[s];
            if (d < best.distance || (d == best.distance && mIds[s] < best.id)) {
                best = {d, mIds[s], s};
            }
        }
        return;
    }
    const bool goLeft = p[node.axis] < node.split;
    search(goLeft ? node.left : node.right, subject, best);
    search(goLeft ? node.right : node.left, subject, best);
}

} // namespace argsplat::detail
