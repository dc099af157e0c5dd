// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/masks.hpp"

#include "argsplat/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace argsplat {

const char *
toString(MaskVariant v) noexcept {
    switch (v) {
    case MaskVariant::Causal: return "causal";
    case MaskVariant::Levelwise: return "levelwise";
    case MaskVariant::Tree: return "tree";
    case MaskVariant::TreeAllInternal: return "tree-all-internal";
    }
    return "unknown";
}

std::string
AttentionMask::toText() const {
    std::string out;
    out.reserve(mN * (mN + 1));
    for (std::size_t q = 0; q < mN; ++q) {
        for (std::size_t k = 0; k < mN; ++k) {
            out.push_back(allowed(q, k) ? '1' : '0');
        }
        out.push_back('\n');
    }
    return out;
}

AttentionMask
causalMask(std::size_t n) {
    if (n == 0) {
        fail(ErrorCode::InvalidParameter, "mask needs at least one token");
    }
    AttentionMask m(n, MaskVariant::Causal);
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t k = 0; k <= q; ++k) {
            m.set(q, k);
        }
    }
    return m;
}

namespace {

// Token positions keyed by node id, after checking the stream describes `tree`.
std::unordered_map<std::uint32_t, std::size_t>
positions(const TokenStream &tokens, const HierarchyTree &tree) {
    if (tokens.tokens.size() != tree.size()) {
        fail(ErrorCode::Inconsistency, "token count " + std::to_string(tokens.tokens.size()) +
                                           " differs from tree size " + std::to_string(tree.size()));
    }
    std::unordered_map<std::uint32_t, std::size_t> pos;
    pos.reserve(tokens.tokens.size());
    for (std::size_t i = 0; i < tokens.tokens.size(); ++i) {
        const TokenRecord &t = tokens.tokens[i];
        const auto it = tree.nodes.find(t.nodeId);
        if (it == tree.nodes.end() || it->second.createdLevel != t.level ||
            it->second.isLeaf() == t.splittable) {
            fail(ErrorCode::Inconsistency, "token for node " + std::to_string(t.nodeId) + " does not match the tree");
        }
        if (!pos.emplace(t.nodeId, i).second) {
            fail(ErrorCode::Inconsistency, "node " + std::to_string(t.nodeId) + " tokenized twice");
        }
    }
    return pos;
}

AttentionMask
frontierMask(const TokenStream &tokens, const HierarchyTree &tree, MaskVariant variant) {
    const auto pos = positions(tokens, tree);
    const LevelSets ls = levelSets(tree);
    const std::size_t n = tokens.tokens.size();
    AttentionMask m(n, variant);

    // Internal nodes in token order, for the all-internal variant.
    std::vector<std::size_t> internal;
    for (std::size_t i = 0; i < n; ++i) {
        if (tokens.tokens[i].splittable) {
            internal.push_back(i);
        }
    }

    for (std::size_t q = 0; q < n; ++q) {
        const TokenRecord &t = tokens.tokens[q];
        m.set(q, q);
        if (t.level == 0) {
            continue;
        }
        for (std::uint32_t id : ls.levels[t.level - 1]) {
            m.set(q, pos.at(id));
        }
        if (variant == MaskVariant::Tree) {
            for (auto a = tree.node(t.nodeId).parent; a; a = tree.node(*a).parent) {
                m.set(q, pos.at(*a));
            }
        } else if (variant == MaskVariant::TreeAllInternal) {
            for (std::size_t k : internal) {
                if (tokens.tokens[k].level < t.level) {
                    m.set(q, k);
                }
            }
        }
    }
    return m;
}

} // namespace

AttentionMask
levelwiseMask(const TokenStream &tokens, const HierarchyTree &tree) {
    return frontierMask(tokens, tree, MaskVariant::Levelwise);
}

AttentionMask
treeMask(const TokenStream &tokens, const HierarchyTree &tree, bool allInternal) {
    return frontierMask(tokens, tree, allInternal ? MaskVariant::TreeAllInternal : MaskVariant::Tree);
}

AttentionMask
buildMask(MaskVariant variant, const TokenStream &tokens, const HierarchyTree &tree) {
    switch (variant) {
    case MaskVariant::Causal: positions(tokens, tree); return causalMask(tokens.tokens.size());
    case MaskVariant::Levelwise: return levelwiseMask(tokens, tree);
    case MaskVariant::Tree: return treeMask(tokens, tree, false);
    case MaskVariant::TreeAllInternal: return treeMask(tokens, tree, true);
    }
    fail(ErrorCode::InvalidParameter, "unknown mask variant");
}

std::vector<std::size_t>
decodeCost(const HierarchyTree &tree, MaskVariant variant) {
    // Quantization does not affect visibility; any spec will do.
    QuantSpec spec;
    spec.max.fill(1.0);
    const TokenStream tokens = tokenizeTree(tree, spec);
    const AttentionMask m    = buildMask(variant, tokens, tree);

    std::vector<std::size_t> cost(tokens.depth + 1, 0);
    std::vector<std::uint8_t> used(m.size());
    std::size_t q = 0;
    for (std::uint32_t level = 0; level <= tokens.depth; ++level) {
        std::fill(used.begin(), used.end(), 0);
        for (; q < m.size() && tokens.tokens[q].level == level; ++q) {
            for (std::size_t k = 0; k < m.size(); ++k) {
                used[k] |= m.allowed(q, k) ? 1 : 0;
            }
        }
        std::size_t count = 0;
        for (auto u : used) {
            count += u;
        }
        cost[level] = count;
    }
    return cost;
}

} // namespace argsplat
