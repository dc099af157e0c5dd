// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/synth.hpp"

#include "argsplat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace argsplat {

double
Rng::normal() {
    if (mHasSpare) {
        mHasSpare = false;
        return mSpare;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double r  = std::sqrt(-2.0 * std::log(u1));
    mSpare          = r * std::sin(2.0 * std::numbers::pi * u2);
    mHasSpare       = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

Quat
Rng::rotation() {
    while (true) {
        Quat q = {normal(), normal(), normal(), normal()};
        const double n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
        if (n2 > 1e-12) {
            return normalizedQuat(q);
        }
    }
}

GaussianSet
synthesizeObject(std::uint64_t seed, const SynthOptions &options) {
    if (options.count == 0 || options.clusters == 0) {
        fail(ErrorCode::InvalidParameter, "synthetic object needs at least one gaussian and one cluster");
    }
    if (!(options.minScale > 0.0 && options.maxScale >= options.minScale)) {
        fail(ErrorCode::InvalidParameter, "synthetic scale range is invalid");
    }
    Rng rng(seed);

    struct Cluster {
        Vec3 centre;
        double spread;
        std::array<double, 3> colour;
    };
    std::vector<Cluster> clusters(options.clusters);
    for (auto &c : clusters) {
        c.centre = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        c.spread = rng.uniform(0.1, 0.25);
        c.colour = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    }

    const double logLo = std::log(options.minScale);
    const double logHi = std::log(options.maxScale);
    GaussianSet set;
    for (std::uint32_t i = 0; i < options.count; ++i) {
        const Cluster &c = clusters[i % options.clusters];
        Gaussian3D g;
        g.center = c.centre + c.spread * Vec3(rng.normal(), rng.normal(), rng.normal());
        g.opacity = rng.uniform(0.3, 0.95);
        for (int k = 0; k < 3; ++k) {
            g.scale[k] = std::exp(rng.uniform(logLo, logHi));
        }
        g.rotation = rng.rotation();
        for (int k = 0; k < 3; ++k) {
            g.dc[k] = c.colour[k] + 0.3 * rng.normal();
        }
        set.add(i, std::move(g));
    }
    return set;
}

} // namespace argsplat

namespace argsplat {

MergeSequence
randomMergeSequence(std::uint64_t seed, std::uint32_t leaves) {
    SynthOptions opts;
    opts.count    = leaves;
    opts.clusters = std::max<std::uint32_t>(1, leaves / 8);
    const GaussianSet base = synthesizeObject(seed, opts);

    Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
    std::vector<std::pair<std::uint32_t, Gaussian3D>> active;
    for (std::size_t i = 0; i < base.size(); ++i) {
        active.emplace_back(base.ids[i], base.gaussians[i]);
    }
    MergeSequence seq;
    seq.sourceCount = leaves;
    std::uint32_t nextId = leaves;
    while (active.size() > 1) {
        const std::size_t i = static_cast<std::size_t>(rng.next() % active.size());
        std::size_t j       = static_cast<std::size_t>(rng.next() % (active.size() - 1));
        if (j >= i) {
            ++j;
        }
        MergeRecord rec;
        rec.step     = static_cast<std::uint32_t>(seq.records.size());
        rec.parentId = nextId++;
        rec.child1Id = active[i].first;
        rec.child2Id = active[j].first;
        rec.child1   = active[i].second;
        rec.child2   = active[j].second;
        rec.parent   = merge(rec.child1, rec.child2).gaussian;
        const std::size_t hi = std::max(i, j), lo = std::min(i, j);
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(hi));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(lo));
        active.emplace_back(rec.parentId, rec.parent);
        seq.records.push_back(std::move(rec));
    }
    return seq;
}

} // namespace argsplat
