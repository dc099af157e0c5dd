// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/tokenize.hpp"

#include "argsplat/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace argsplat {

namespace {

constexpr double kWiden = 1e-6;

bool
isScaleAttr(std::size_t attr) {
    return attr >= kScaleX && attr <= kScaleZ;
}

} // namespace

Quat
canonicalQuat(const Quat &q) {
    for (double c : q) {
        if (c > 0.0) {
            return q;
        }
        if (c < 0.0) {
            return {-q[0], -q[1], -q[2], -q[3]};
        }
    }
    return q;
}

std::array<double, kTokenAttributes>
tokenAttributes(const Gaussian3D &g) {
    const Quat q = canonicalQuat(g.rotation);
    return {g.center[0], g.center[1], g.center[2], g.scale[0], g.scale[1], g.scale[2],
            q[0],        q[1],        q[2],        q[3],       g.opacity,  g.dc[0],
            g.dc[1],     g.dc[2]};
}

QuantSpec
fitQuantSpec(std::span<const GaussianSet> sets) {
    QuantSpec spec;
    spec.min.fill(std::numeric_limits<double>::infinity());
    spec.max.fill(-std::numeric_limits<double>::infinity());
    std::size_t count = 0;
    for (const GaussianSet &set : sets) {
        for (const Gaussian3D &g : set.gaussians) {
            const auto attrs = tokenAttributes(g);
            for (std::size_t a = 0; a < kTokenAttributes; ++a) {
                const double v = isScaleAttr(a) ? std::log(attrs[a]) : attrs[a];
                spec.min[a]    = std::min(spec.min[a], v);
                spec.max[a]    = std::max(spec.max[a], v);
            }
            ++count;
        }
    }
    if (count == 0) {
        fail(ErrorCode::InvalidParameter, "cannot fit quantization ranges to an empty corpus");
    }
    for (std::size_t a = kRotW; a <= kRotZ; ++a) {
        spec.min[a] = -1.0;
        spec.max[a] = 1.0;
    }
    spec.min[kOpacity] = 0.0;
    spec.max[kOpacity] = 1.0;
    for (std::size_t a = 0; a < kTokenAttributes; ++a) {
        spec.logScale[a] = isScaleAttr(a);
        if (!(spec.max[a] > spec.min[a])) {
            spec.min[a] -= 0.5 * kWiden;
            spec.max[a] += 0.5 * kWiden;
            spec.widened[a] = true;
        }
    }
    return spec;
}

std::uint8_t
quantizeValue(double v, std::size_t attr, const QuantSpec &spec, bool *clamped) {
    if (spec.logScale[attr]) {
        v = std::log(v);
    }
    const double lo = spec.min[attr];
    const double hi = spec.max[attr];
    const bool outside = !(v >= lo && v <= hi);
    if (clamped) {
        *clamped = outside;
    }
    const double t = std::floor((v - lo) / (hi - lo) * kTokenBins);
    if (!(t > 0.0)) {
        return 0;
    }
    return static_cast<std::uint8_t>(std::min(t, static_cast<double>(kTokenBins - 1)));
}

double
dequantizeValue(std::uint8_t bin, std::size_t attr, const QuantSpec &spec) {
    const double lo = spec.min[attr];
    const double hi = spec.max[attr];
    const double v  = lo + (static_cast<double>(bin) + 0.5) * (hi - lo) / kTokenBins;
    return spec.logScale[attr] ? std::exp(v) : v;
}

TokenBins
quantize(const Gaussian3D &g, const QuantSpec &spec, std::size_t *clampCount) {
    const auto attrs = tokenAttributes(g);
    TokenBins bins{};
    for (std::size_t a = 0; a < kTokenAttributes; ++a) {
        bool clamped = false;
        bins[a]      = quantizeValue(attrs[a], a, spec, &clamped);
        if (clamped && clampCount) {
            ++*clampCount;
        }
    }
    return bins;
}

Gaussian3D
dequantize(const TokenBins &bins, const QuantSpec &spec) {
    std::array<double, kTokenAttributes> v{};
    for (std::size_t a = 0; a < kTokenAttributes; ++a) {
        v[a] = dequantizeValue(bins[a], a, spec);
    }
    Gaussian3D g;
    g.center   = Vec3(v[kCenterX], v[kCenterY], v[kCenterZ]);
    g.scale    = Vec3(v[kScaleX], v[kScaleY], v[kScaleZ]).cwiseMax(kMinScale);
    g.rotation = normalizedQuat({v[kRotW], v[kRotX], v[kRotY], v[kRotZ]});
    g.opacity  = std::clamp(v[kOpacity], std::numeric_limits<double>::min(), 1.0);
    g.dc       = {v[kColorR], v[kColorG], v[kColorB]};
    return g;
}

TokenStream
tokenizeTree(const HierarchyTree &tree, const QuantSpec &spec) {
    TokenStream out;
    out.spec = spec;
    out.tokens.reserve(tree.size());

    auto emit = [&](std::uint32_t id, std::uint32_t parent, std::uint32_t level) {
        const TreeNode &n = tree.node(id);
        TokenRecord t;
        t.bins       = quantize(n.payload, spec);
        t.splittable = !n.isLeaf();
        t.nodeId     = id;
        t.parentId   = parent;
        t.level      = level;
        out.tokens.push_back(t);
    };

    emit(tree.rootId, kNoParent, 0);
    // Every internal node splits on the level right after its creation, so
    // level l+1 is exactly the children of level-l tokens, in token order.
    std::size_t begin = 0;
    for (std::uint32_t level = 0; begin < out.tokens.size(); ++level) {
        const std::size_t end = out.tokens.size();
        for (std::size_t i = begin; i < end; ++i) {
            const TreeNode &n = tree.node(out.tokens[i].nodeId);
            if (n.children) {
                const std::uint32_t parent = out.tokens[i].nodeId;
                emit((*n.children)[0], parent, level + 1);
                emit((*n.children)[1], parent, level + 1);
            }
        }
        if (out.tokens.size() > end) {
            out.depth = level + 1;
        }
        begin = end;
    }
    return out;
}

GaussianSet
allNodes(const HierarchyTree &tree) {
    GaussianSet out;
    for (const auto &[id, n] : tree.nodes) {
        out.add(id, n.payload);
    }
    return out;
}

GaussianSet
tokenFrontier(const TokenStream &stream, std::size_t level) {
    GaussianSet out;
    for (const TokenRecord &t : stream.tokens) {
        if (t.level == level || (t.level < level && !t.splittable)) {
            out.add(t.nodeId, dequantize(t.bins, stream.spec));
        }
    }
    return out.sortedById();
}

} // namespace argsplat
