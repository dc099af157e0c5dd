// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/simplify.hpp"

#include "argsplat/error.hpp"
#include "kdtree.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace argsplat {

GaussianSet
GaussianSet::sortedById() const {
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    GaussianSet out;
    out.ids.reserve(size());
    out.gaussians.reserve(size());
    for (std::size_t i : order) {
        out.add(ids[i], gaussians[i]);
    }
    return out;
}

double
partnerWeight(const Gaussian3D &g, double beta) {
    if (beta == 0.0) {
        return 1.0;
    }
    return std::pow(moments(g).m0, beta);
}

std::uint32_t
nearestPartner(std::uint32_t subjectId, const GaussianSet &set, const SimplifyConfig &config) {
    if (set.size() < 2) {
        fail(ErrorCode::InsufficientPopulation, "partner search needs at least two gaussians");
    }
    const auto it = std::find(set.ids.begin(), set.ids.end(), subjectId);
    if (it == set.ids.end()) {
        fail(ErrorCode::InvalidParameter, "subject id " + std::to_string(subjectId) + " is not in the set");
    }
    const Vec3 &p = set.gaussians[static_cast<std::size_t>(it - set.ids.begin())].center;

    double bestD     = std::numeric_limits<double>::infinity();
    std::uint32_t bestId = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.ids[i] == subjectId) {
            continue;
        }
        const double d = centerDistance(p, set.gaussians[i].center) / partnerWeight(set.gaussians[i], config.beta);
        if (d < bestD || (d == bestD && set.ids[i] < bestId)) {
            bestD  = d;
            bestId = set.ids[i];
        }
    }
    return bestId;
}

namespace {

struct HeapEntry {
    double det;
    std::uint32_t id;
    std::size_t slot;
};

// Min-heap on (det, id).
struct HeapAfter {
    bool operator()(const HeapEntry &a, const HeapEntry &b) const {
        return a.det > b.det || (a.det == b.det && a.id > b.id);
    }
};

class Simplifier {
  public:
    Simplifier(const GaussianSet &set, const SimplifyConfig &config)
        : mConfig(config), mIndex(mCenters, mWeights, mIds, config.leafSize) {
        const std::size_t n = set.size();
        const std::size_t capacity = 2 * n;
        mGaussians.reserve(capacity);
        mCenters.reserve(capacity);
        mWeights.reserve(capacity);
        mIds.reserve(capacity);
        mActive.reserve(capacity);

        std::unordered_set<std::uint32_t> seen;
        std::uint32_t maxId = 0;
        for (std::size_t i = 0; i < n; ++i) {
            validate(set.gaussians[i]);
            if (!seen.insert(set.ids[i]).second) {
                fail(ErrorCode::InvalidParameter, "duplicate gaussian id " + std::to_string(set.ids[i]));
            }
            maxId = std::max(maxId, set.ids[i]);
            addSlot(set.ids[i], set.gaussians[i]);
        }
        if (n > 0 && static_cast<std::uint64_t>(maxId) + n > std::numeric_limits<std::uint32_t>::max()) {
            fail(ErrorCode::InvalidParameter, "gaussian ids leave no room for parent ids");
        }
        mNextId = n > 0 ? maxId + 1 : 0;

        if (!mConfig.referenceScan) {
            rebuild();
        }
    }

    SimplifyResult run(std::size_t targetCount) {
        SimplifyResult result;
        result.sequence.sourceCount = static_cast<std::uint32_t>(mIds.size());
        const std::size_t merges = mIds.size() - targetCount;
        result.sequence.records.reserve(merges);

        for (std::size_t step = 0; step < merges; ++step) {
            const std::size_t subject = popSubject();
            const std::size_t partner = mConfig.referenceScan ? scanPartner(subject) : indexPartner(subject);

            MergeOutput merged = merge(mGaussians[subject], mGaussians[partner]);
            result.opacityClamps += merged.opacityClamped ? 1 : 0;

            MergeRecord rec;
            rec.step     = static_cast<std::uint32_t>(step);
            rec.parentId = mNextId++;
            rec.child1Id = mIds[subject];
            rec.child2Id = mIds[partner];
            rec.child1   = mGaussians[subject];
            rec.child2   = mGaussians[partner];
            rec.parent   = merged.gaussian;

            deactivate(subject);
            deactivate(partner);
            const std::size_t slot = addSlot(rec.parentId, std::move(merged.gaussian));
            if (!mConfig.referenceScan) {
                mIndex.insert(slot);
            }
            result.sequence.records.push_back(std::move(rec));
        }

        for (std::size_t s = 0; s < mIds.size(); ++s) {
            if (mActive[s]) {
                result.remaining.add(mIds[s], mGaussians[s]);
            }
        }
        result.remaining = result.remaining.sortedById();
        return result;
    }

  private:
    std::size_t addSlot(std::uint32_t id, Gaussian3D g) {
        const std::size_t slot = mGaussians.size();
        mCenters.push_back(g.center);
        mWeights.push_back(partnerWeight(g, mConfig.beta));
        mIds.push_back(id);
        mActive.push_back(1);
        mHeap.push({detCov(g), id, slot});
        mGaussians.push_back(std::move(g));
        ++mLive;
        return slot;
    }

    void deactivate(std::size_t slot) {
        mActive[slot] = 0;
        --mLive;
        if (!mConfig.referenceScan) {
            mIndex.remove(slot);
            if (++mRemovedSinceBuild >= std::max<std::size_t>(mLiveAtBuild / 4, 16)) {
                rebuild();
            }
        }
    }

    void rebuild() {
        std::vector<std::size_t> live;
        live.reserve(mLive);
        for (std::size_t s = 0; s < mActive.size(); ++s) {
            if (mActive[s]) {
                live.push_back(s);
            }
        }
        mLiveAtBuild       = live.size();
        mRemovedSinceBuild = 0;
        mIndex.build(std::move(live));
    }

    // Slots are never reused, so an inactive slot marks a stale entry.
    std::size_t popSubject() {
        while (true) {
            const HeapEntry top = mHeap.top();
            mHeap.pop();
            if (mActive[top.slot]) {
                return top.slot;
            }
        }
    }

    std::size_t scanPartner(std::size_t subject) const {
        const Vec3 &p = mCenters[subject];
        double bestD  = std::numeric_limits<double>::infinity();
        std::uint32_t bestId = std::numeric_limits<std::uint32_t>::max();
        std::size_t best = subject;
        for (std::size_t s = 0; s < mIds.size(); ++s) {
            if (s == subject || !mActive[s]) {
                continue;
            }
            const double d = centerDistance(p, mCenters[s]) / mWeights[s];
            if (d < bestD || (d == bestD && mIds[s] < bestId)) {
                bestD  = d;
                bestId = mIds[s];
                best   = s;
            }
        }
        return best;
    }

    std::size_t indexPartner(std::size_t subject) const {
        const std::size_t s = mIndex.nearest(subject);
        if (s == detail::PartnerIndex::npos) {
            fail(ErrorCode::InsufficientPopulation, "no partner available");
        }
        return s;
    }

    SimplifyConfig mConfig;
    std::vector<Gaussian3D> mGaussians;
    std::vector<Vec3> mCenters;
    std::vector<double> mWeights;
    std::vector<std::uint32_t> mIds;
    std::vector<std::uint8_t> mActive;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapAfter> mHeap;
    detail::PartnerIndex mIndex;
    std::uint32_t mNextId = 0;
    std::size_t mLive = 0;
    std::size_t mLiveAtBuild = 0;
    std::size_t mRemovedSinceBuild = 0;
};

} // namespace

SimplifyResult
simplify(const GaussianSet &set, std::size_t targetCount, const SimplifyConfig &config) {
    if (set.ids.size() != set.gaussians.size()) {
        fail(ErrorCode::InvalidParameter, "gaussian set ids and payloads differ in length");
    }
    if (targetCount < 1 || targetCount > set.size()) {
        std::ostringstream os;
        os << "target count " << targetCount << " outside [1, " << set.size() << "]";
        fail(ErrorCode::InvalidTarget, os.str());
    }
    Simplifier s(set, config);
    return s.run(targetCount);
}

GaussianSet
expand(const GaussianSet &roots, const MergeSequence &sequence, std::size_t steps) {
    if (steps > sequence.records.size()) {
        fail(ErrorCode::InvalidParameter, "cannot expand more steps than the sequence holds");
    }
    std::map<std::uint32_t, Gaussian3D> live;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        live.emplace(roots.ids[i], roots.gaussians[i]);
    }
    const std::size_t stop = sequence.records.size() - steps;
    for (std::size_t r = sequence.records.size(); r-- > stop;) {
        const MergeRecord &rec = sequence.records[r];
        const auto it = live.find(rec.parentId);
        if (it == live.end()) {
            fail(ErrorCode::InconsistentSequence,
                 "record " + std::to_string(rec.step) + ": parent id " + std::to_string(rec.parentId) + " not present");
        }
        live.erase(it);
        if (!live.emplace(rec.child1Id, rec.child1).second || !live.emplace(rec.child2Id, rec.child2).second) {
            fail(ErrorCode::InconsistentSequence,
                 "record " + std::to_string(rec.step) + ": child id already present");
        }
    }
    GaussianSet out;
    for (auto &[id, g] : live) {
        out.add(id, std::move(g));
    }
    return out;
}

} // namespace argsplat
