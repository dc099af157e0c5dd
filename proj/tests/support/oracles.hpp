// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used by the unit and acceptance tests.
// Everything numeric here runs in long double and shares no code with the
// library beyond the public data types.

#pragma once

#include "argsplat/gaussian.hpp"
#include "argsplat/hierarchy.hpp"
#include "argsplat/masks.hpp"
#include "argsplat/render.hpp"
#include "argsplat/simplify.hpp"
#include "argsplat/synth.hpp"
#include "argsplat/tokenize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using LD   = long double;
using MatL = std::array<std::array<LD, 3>, 3>;
using VecL = std::array<LD, 3>;

inline MatL
rotationL(const argsplat::Quat &q) {
    LD w = q[0], x = q[1], y = q[2], z = q[3];
    const LD n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n; x /= n; y /= n; z /= n;
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
             {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
             {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

inline MatL
covarianceL(const argsplat::Vec3 &s, const argsplat::Quat &q) {
    const MatL r = rotationL(q);
    MatL c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) c[i][j] += r[i][k] * (LD(s[k]) * s[k]) * r[j][k];
    return c;
}

inline MatL
covarianceL(const argsplat::Gaussian3D &g) {
    return covarianceL(g.scale, g.rotation);
}

inline LD
detL(const MatL &m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline MatL
inverseL(const MatL &m) {
    const LD d = detL(m);
    MatL inv{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
        }
    }
    return inv;
}

inline MatL
addL(const MatL &a, const MatL &b) {
    MatL c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c[i][j] = a[i][j] + b[i][j];
    return c;
}

inline VecL
mulL(const MatL &m, const VecL &v) {
    VecL r{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) r[i] += m[i][k] * v[k];
    return r;
}

inline VecL
toL(const argsplat::Vec3 &v) {
    return {v[0], v[1], v[2]};
}

struct CrossL {
    LD opacity;
    VecL center;
    MatL covariance;
};

inline CrossL
crossL(const argsplat::Gaussian3D &a, const argsplat::Gaussian3D &b) {
    const MatL pa = inverseL(covarianceL(a));
    const MatL pb = inverseL(covarianceL(b));
    const MatL sc = inverseL(addL(pa, pb));
    const VecL ua = mulL(pa, toL(a.center));
    const VecL ub = mulL(pb, toL(b.center));
    const VecL uc = mulL(sc, {ua[0] + ub[0], ua[1] + ub[1], ua[2] + ub[2]});
    return {LD(a.opacity) * b.opacity, uc, sc};
}

inline LD
massL(LD opacity, const MatL &cov) {
    const LD pi = 3.141592653589793238462643383279502884L;
    return opacity * std::pow(2 * pi, LD(1.5)) * std::sqrt(detL(cov));
}

struct MergeL {
    LD m0a, m0b, m0c, m03;
    VecL m1a, m1b, m1c, m13;
    VecL center;
    MatL covariance;
    LD opacity;
    std::array<LD, 3> dc;
};

// Straight-line evaluation of the merge equations.
inline MergeL
mergeL(const argsplat::Gaussian3D &a, const argsplat::Gaussian3D &b) {
    MergeL r{};
    const MatL ca = covarianceL(a), cb = covarianceL(b);
    const CrossL c = crossL(a, b);
    r.m0a = massL(a.opacity, ca);
    r.m0b = massL(b.opacity, cb);
    r.m0c = massL(c.opacity, c.covariance);
    r.m03 = r.m0a + r.m0b - r.m0c;
    for (int i = 0; i < 3; ++i) {
        r.m1a[i]    = r.m0a * a.center[i];
        r.m1b[i]    = r.m0b * b.center[i];
        r.m1c[i]    = r.m0c * c.center[i];
        r.m13[i]    = r.m1a[i] + r.m1b[i] - r.m1c[i];
        r.center[i] = r.m13[i] / r.m03;
        r.dc[i]     = (r.m0a * a.dc[i] + r.m0b * b.dc[i]) / (r.m0a + r.m0b);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.covariance[i][j] = (r.m0a * ca[i][j] + r.m0b * cb[i][j]) / r.m03;
    r.opacity = LD(a.opacity) + b.opacity - c.opacity;
    return r;
}

// Midpoint Riemann sum of o * exp(-x^T P x / 2) over the axis-aligned box
// spanning six marginal standard deviations on each side.
inline LD
gridMass(const argsplat::Gaussian3D &g, int cells) {
    const MatL cov = covarianceL(g);
    const MatL p   = inverseL(cov);
    LD half[3], h[3];
    for (int i = 0; i < 3; ++i) {
        half[i] = 6 * std::sqrt(cov[i][i]);
        h[i]    = 2 * half[i] / cells;
    }
    LD sum = 0;
    for (int i = 0; i < cells; ++i) {
        const LD x = -half[0] + (i + LD(0.5)) * h[0];
        for (int j = 0; j < cells; ++j) {
            const LD y = -half[1] + (j + LD(0.5)) * h[1];
            for (int k = 0; k < cells; ++k) {
                const LD z = -half[2] + (k + LD(0.5)) * h[2];
                const LD q = p[0][0] * x * x + p[1][1] * y * y + p[2][2] * z * z +
                             2 * (p[0][1] * x * y + p[0][2] * x * z + p[1][2] * y * z);
                sum += std::exp(-q / 2);
            }
        }
    }
    return LD(g.opacity) * sum * h[0] * h[1] * h[2];
}

inline LD
relErr(LD got, LD want) {
    const LD scale = std::max<LD>(std::fabs(want), 1e-300L);
    return std::fabs(got - want) / scale;
}

inline argsplat::Gaussian3D
randomGaussian(argsplat::Rng &rng, double minScale = 0.05, double maxScale = 0.5, double extent = 2.0) {
    argsplat::Gaussian3D g;
    g.center   = {rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
    g.scale    = {rng.uniform(minScale, maxScale), rng.uniform(minScale, maxScale), rng.uniform(minScale, maxScale)};
    g.rotation = rng.rotation();
    g.opacity  = rng.uniform(0.05, 1.0);
    g.dc       = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    return g;
}

inline argsplat::GaussianSet
randomSet(std::uint64_t seed, std::size_t n, double extent = 2.0) {
    argsplat::Rng rng(seed);
    argsplat::GaussianSet set;
    for (std::size_t i = 0; i < n; ++i) set.add(static_cast<std::uint32_t>(i), randomGaussian(rng, 0.02, 0.3, extent));
    return set;
}

// Quadratic-time simplifier: every step scans the whole active list for the
// smallest (det, id) and again for its nearest partner.
inline argsplat::MergeSequence
naiveSimplify(const argsplat::GaussianSet &input, std::size_t target, double beta = 0.0) {
    std::vector<std::uint32_t> ids(input.ids);
    std::vector<argsplat::Gaussian3D> gs(input.gaussians);
    argsplat::MergeSequence seq;
    seq.sourceCount = static_cast<std::uint32_t>(ids.size());
    std::uint32_t next = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
    std::uint32_t step = 0;
    while (ids.size() > target) {
        std::size_t s = 0;
        for (std::size_t i = 1; i < ids.size(); ++i) {
            const double di = argsplat::detCov(gs[i]), ds = argsplat::detCov(gs[s]);
            if (di < ds || (di == ds && ids[i] < ids[s])) s = i;
        }
        std::size_t p   = ids.size();
        double bestD    = 0.0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i == s) continue;
            const double d = argsplat::centerDistance(gs[s].center, gs[i].center) / argsplat::partnerWeight(gs[i], beta);
            if (p == ids.size() || d < bestD || (d == bestD && ids[i] < ids[p])) {
                p     = i;
                bestD = d;
            }
        }
        argsplat::MergeRecord r;
        r.step     = step++;
        r.parentId = next++;
        r.child1Id = ids[s];
        r.child2Id = ids[p];
        r.child1   = gs[s];
        r.child2   = gs[p];
        r.parent   = argsplat::merge(gs[s], gs[p]).gaussian;
        seq.records.push_back(r);
        for (std::size_t k : {std::max(s, p), std::min(s, p)}) {
            ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(k));
            gs.erase(gs.begin() + static_cast<std::ptrdiff_t>(k));
        }
        ids.push_back(r.parentId);
        gs.push_back(r.parent);
    }
    return seq;
}

// Parent/child map rebuilt by replaying records.
struct ReplayTree {
    std::map<std::uint32_t, std::array<std::uint32_t, 2>> children;
    std::map<std::uint32_t, std::uint32_t> parent;
    std::uint32_t root = 0;
};

inline ReplayTree
replay(const argsplat::MergeSequence &seq) {
    ReplayTree t;
    for (const auto &r : seq.records) {
        t.children[r.parentId]  = {r.child1Id, r.child2Id};
        t.parent[r.child1Id]    = r.parentId;
        t.parent[r.child2Id]    = r.parentId;
        t.root                  = r.parentId;
    }
    return t;
}

// Frontier levels by recursion on depth: node v is in level l iff its depth
// is at most l and it is either a leaf or its children are deeper than l.
// Holds because every internal node splits exactly one level after creation.
inline std::vector<std::set<std::uint32_t>>
frontiersByDepth(const argsplat::HierarchyTree &tree) {
    std::map<std::uint32_t, std::size_t> depth;
    std::size_t maxDepth = 0;
    std::vector<std::uint32_t> stack{tree.rootId};
    depth[tree.rootId] = 0;
    while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        maxDepth = std::max(maxDepth, depth[v]);
        const auto &n = tree.nodes.at(v);
        if (n.children) {
            for (std::uint32_t c : *n.children) {
                depth[c] = depth[v] + 1;
                stack.push_back(c);
            }
        }
    }
    std::vector<std::set<std::uint32_t>> levels(maxDepth + 1);
    for (const auto &[id, node] : tree.nodes) {
        for (std::size_t l = depth[id]; l <= maxDepth; ++l) {
            if (node.children && l > depth[id]) break;
            levels[l].insert(id);
        }
    }
    return levels;
}

inline std::set<std::uint32_t>
strictAncestors(const argsplat::HierarchyTree &tree, std::uint32_t id) {
    std::set<std::uint32_t> out;
    auto p = tree.nodes.at(id).parent;
    while (p) {
        out.insert(*p);
        p = tree.nodes.at(*p).parent;
    }
    return out;
}

// Plain BFS from the root, children visited child1 then child2.
inline std::vector<std::uint32_t>
bfsOrder(const argsplat::HierarchyTree &tree) {
    std::vector<std::uint32_t> order;
    std::deque<std::uint32_t> queue{tree.rootId};
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        order.push_back(v);
        const auto &n = tree.nodes.at(v);
        if (n.children) {
            queue.push_back((*n.children)[0]);
            queue.push_back((*n.children)[1]);
        }
    }
    return order;
}

// Direct sliding-window SSIM: every window's statistics are accumulated from
// scratch with the 2D Gaussian weights.
inline double
naiveSsim(const argsplat::Image &a, const argsplat::Image &b) {
    const int r = 5;
    LD w[11][11];
    LD total = 0;
    for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j) total += w[i + r][j + r] = std::exp(-LD(i * i + j * j) / (2 * LD(1.5) * LD(1.5)));
    for (auto &row : w)
        for (auto &v : row) v /= total;
    const LD c1 = LD(0.01) * LD(0.01), c2 = LD(0.03) * LD(0.03);
    LD acc         = 0;
    std::size_t nw = 0;
    for (int c = 0; c < 3; ++c) {
        for (std::uint32_t y = r; y + r < a.height; ++y) {
            for (std::uint32_t x = r; x + r < a.width; ++x) {
                LD ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        const LD wv = w[dy + r][dx + r];
                        const LD va = a.at(x + dx, y + dy, c), vb = b.at(x + dx, y + dy, c);
                        ma += wv * va;
                        mb += wv * vb;
                        saa += wv * va * va;
                        sbb += wv * vb * vb;
                        sab += wv * va * vb;
                    }
                }
                const LD va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++nw;
            }
        }
    }
    return static_cast<double>(acc / nw);
}

inline argsplat::Image
randomImage(std::uint64_t seed, std::uint32_t w, std::uint32_t h) {
    argsplat::Rng rng(seed);
    argsplat::Image img(w, h);
    for (float &v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

} // namespace oracle
