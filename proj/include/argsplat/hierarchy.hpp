// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/simplify.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace argsplat {

/// split_level of a node that never splits.
inline constexpr std::uint32_t kNeverSplits = std::numeric_limits<std::uint32_t>::max();

struct TreeNode {
    Gaussian3D payload;
    std::optional<std::uint32_t> parent;
    std::optional<std::array<std::uint32_t, 2>> children;
    std::uint32_t createdLevel = 0;
    std::uint32_t splitLevel = kNeverSplits;

    bool isLeaf() const noexcept { return !children.has_value(); }
};

/// Binary merge tree. A node is present in frontier l for
/// createdLevel <= l < splitLevel.
struct HierarchyTree {
    std::map<std::uint32_t, TreeNode> nodes;
    std::uint32_t rootId = 0;

    const TreeNode &node(std::uint32_t id) const;
    std::size_t size() const noexcept { return nodes.size(); }

    /// Single-node tree.
    static HierarchyTree single(std::uint32_t id, Gaussian3D payload);
};

/// Frontiers N_0 .. N_L; N_0 = {root}.
struct LevelSets {
    std::vector<std::vector<std::uint32_t>> levels;

    std::size_t depth() const noexcept { return levels.empty() ? 0 : levels.size() - 1; }
};

/// Builds the parent -> children map from a complete merge sequence and
/// assigns levels. Throws NotFullySimplified unless the records reduce the
/// source set to a single root.
HierarchyTree buildTree(const MergeSequence &sequence);

/// As above, but also accepts the end-state roots (needed for n = 1, where
/// the sequence is empty). `roots` must hold exactly one Gaussian.
HierarchyTree buildTree(const MergeSequence &sequence, const GaussianSet &roots);

/// Frontier expansion: every node with children is replaced by them.
LevelSets levelSets(const HierarchyTree &tree);

/// Recomputes createdLevel/splitLevel for every node from the expansion.
void assignLevels(HierarchyTree &tree);

struct TreeStats {
    std::size_t leaves = 0;
    std::size_t internal = 0;
    std::size_t depth = 0;
    std::vector<std::size_t> levelSizes;
    std::size_t maxLeafDepth = 0;
    double meanLeafDepth = 0.0;
};

TreeStats stats(const HierarchyTree &tree);

/// Leaves of the tree as a set ordered by id.
GaussianSet leafSet(const HierarchyTree &tree);

/// Gaussians of frontier `level` (clamped to the last level), ordered by id.
GaussianSet frontierSet(const HierarchyTree &tree, std::size_t level);

/// One line per node: "id parent child1 child2 created split", '-' for
/// absent fields and "inf" for leaves' split level.
std::string treeToText(const HierarchyTree &tree);

std::string statsToJson(const TreeStats &s);

} // namespace argsplat
