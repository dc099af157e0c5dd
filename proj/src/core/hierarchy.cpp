// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/hierarchy.hpp"

#include "argsplat/error.hpp"

#include <algorithm>
#include <sstream>

namespace argsplat {

const TreeNode &
HierarchyTree::node(std::uint32_t id) const {
    const auto it = nodes.find(id);
    if (it == nodes.end()) {
        fail(ErrorCode::Inconsistency, "tree has no node " + std::to_string(id));
    }
    return it->second;
}

HierarchyTree
HierarchyTree::single(std::uint32_t id, Gaussian3D payload) {
    HierarchyTree t;
    t.rootId = id;
    TreeNode n;
    n.payload = std::move(payload);
    t.nodes.emplace(id, std::move(n));
    return t;
}

namespace {

HierarchyTree
treeFromRecords(const MergeSequence &sequence) {
    HierarchyTree tree;
    auto attachLeaf = [&](std::uint32_t id, const Gaussian3D &g) {
        auto [it, inserted] = tree.nodes.try_emplace(id);
        if (inserted) {
            it->second.payload = g;
        }
        return it;
    };

    for (const MergeRecord &rec : sequence.records) {
        if (rec.child1Id == rec.child2Id) {
            fail(ErrorCode::InconsistentSequence, "record merges a node with itself");
        }
        auto c1 = attachLeaf(rec.child1Id, rec.child1);
        auto c2 = attachLeaf(rec.child2Id, rec.child2);
        if (c1->second.parent || c2->second.parent) {
            fail(ErrorCode::InconsistentSequence,
                 "record " + std::to_string(rec.step) + " consumes an already merged node");
        }
        c1->second.parent = rec.parentId;
        c2->second.parent = rec.parentId;

        auto [p, inserted] = tree.nodes.try_emplace(rec.parentId);
        if (!inserted) {
            fail(ErrorCode::InconsistentSequence, "parent id " + std::to_string(rec.parentId) + " reused");
        }
        p->second.payload  = rec.parent;
        p->second.children = std::array<std::uint32_t, 2>{rec.child1Id, rec.child2Id};
    }

    std::vector<std::uint32_t> roots;
    for (const auto &[id, n] : tree.nodes) {
        if (!n.parent) {
            roots.push_back(id);
        }
    }
    if (roots.size() != 1) {
        fail(ErrorCode::NotFullySimplified,
             "merge sequence leaves " + std::to_string(roots.size()) + " roots");
    }
    tree.rootId = roots.front();
    return tree;
}

// Walks the frontier expansion, reporting each level to `visit`.
template <typename Visit>
void
expandLevels(const HierarchyTree &tree, Visit &&visit) {
    std::vector<std::uint32_t> frontier{tree.rootId};
    for (std::uint32_t level = 0;; ++level) {
        visit(level, frontier);
        std::vector<std::uint32_t> next;
        next.reserve(frontier.size() * 2);
        bool split = false;
        for (std::uint32_t id : frontier) {
            const TreeNode &n = tree.node(id);
            if (n.children) {
                next.push_back((*n.children)[0]);
                next.push_back((*n.children)[1]);
                split = true;
            } else {
                next.push_back(id);
            }
        }
        if (!split) {
            return;
        }
        frontier = std::move(next);
    }
}

} // namespace

HierarchyTree
buildTree(const MergeSequence &sequence) {
    if (sequence.sourceCount == 0 || sequence.records.size() + 1 != sequence.sourceCount) {
        fail(ErrorCode::NotFullySimplified,
             std::to_string(sequence.records.size()) + " records cannot reduce " +
                 std::to_string(sequence.sourceCount) + " gaussians to one");
    }
    HierarchyTree tree = treeFromRecords(sequence);
    if (tree.nodes.size() != 2 * static_cast<std::size_t>(sequence.sourceCount) - 1) {
        fail(ErrorCode::InconsistentSequence, "node count does not match source count");
    }
    assignLevels(tree);
    return tree;
}

HierarchyTree
buildTree(const MergeSequence &sequence, const GaussianSet &roots) {
    if (roots.size() != 1) {
        fail(ErrorCode::NotFullySimplified, "expected exactly one root, got " + std::to_string(roots.size()));
    }
    if (sequence.records.empty()) {
        if (sequence.sourceCount > 1) {
            fail(ErrorCode::NotFullySimplified, "empty sequence over more than one gaussian");
        }
        return HierarchyTree::single(roots.ids.front(), roots.gaussians.front());
    }
    HierarchyTree tree = buildTree(sequence);
    if (tree.rootId != roots.ids.front()) {
        fail(ErrorCode::Inconsistency, "root id does not match the sequence");
    }
    return tree;
}

LevelSets
levelSets(const HierarchyTree &tree) {
    LevelSets out;
    expandLevels(tree, [&](std::uint32_t, const std::vector<std::uint32_t> &frontier) {
        out.levels.push_back(frontier);
    });
    return out;
}

void
assignLevels(HierarchyTree &tree) {
    for (auto &[id, n] : tree.nodes) {
        n.createdLevel = 0;
        n.splitLevel   = kNeverSplits;
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> created; // (id, level)
    expandLevels(tree, [&](std::uint32_t level, const std::vector<std::uint32_t> &frontier) {
        for (std::uint32_t id : frontier) {
            const TreeNode &n = tree.node(id);
            if (n.children) {
                created.emplace_back((*n.children)[0], level + 1);
                created.emplace_back((*n.children)[1], level + 1);
            }
        }
    });
    for (const auto &[id, level] : created) {
        TreeNode &n    = tree.nodes.at(id);
        n.createdLevel = level;
        tree.nodes.at(*n.parent).splitLevel = level;
    }
}

TreeStats
stats(const HierarchyTree &tree) {
    TreeStats s;
    const LevelSets ls = levelSets(tree);
    s.depth = ls.depth();
    for (const auto &level : ls.levels) {
        s.levelSizes.push_back(level.size());
    }
    double depthSum = 0.0;
    for (const auto &[id, n] : tree.nodes) {
        if (n.isLeaf()) {
            ++s.leaves;
            s.maxLeafDepth = std::max<std::size_t>(s.maxLeafDepth, n.createdLevel);
            depthSum += n.createdLevel;
        } else {
            ++s.internal;
        }
    }
    s.meanLeafDepth = s.leaves ? depthSum / static_cast<double>(s.leaves) : 0.0;
    return s;
}

GaussianSet
leafSet(const HierarchyTree &tree) {
    GaussianSet out;
    for (const auto &[id, n] : tree.nodes) {
        if (n.isLeaf()) {
            out.add(id, n.payload);
        }
    }
    return out;
}

GaussianSet
frontierSet(const HierarchyTree &tree, std::size_t level) {
    GaussianSet out;
    for (const auto &[id, n] : tree.nodes) {
        if (n.createdLevel <= level && (n.splitLevel == kNeverSplits || level < n.splitLevel)) {
            out.add(id, n.payload);
        }
    }
    return out;
}

std::string
treeToText(const HierarchyTree &tree) {
    std::ostringstream os;
    os << "# id parent child1 child2 created_level split_level\n";
    for (const auto &[id, n] : tree.nodes) {
        os << id << ' ';
        if (n.parent) {
            os << *n.parent;
        } else {
            os << '-';
        }
        if (n.children) {
            os << ' ' << (*n.children)[0] << ' ' << (*n.children)[1];
        } else {
            os << " - -";
        }
        os << ' ' << n.createdLevel << ' ';
        if (n.splitLevel == kNeverSplits) {
            os << "inf";
        } else {
            os << n.splitLevel;
        }
        os << '\n';
    }
    return os.str();
}

std::string
statsToJson(const TreeStats &s) {
    std::ostringstream os;
    os << "{\n  \"n_leaves\": " << s.leaves << ",\n  \"n_internal\": " << s.internal
       << ",\n  \"depth\": " << s.depth << ",\n  \"level_sizes\": [";
    for (std::size_t i = 0; i < s.levelSizes.size(); ++i) {
        os << (i ? ", " : "") << s.levelSizes[i];
    }
    os.precision(17);
    os << "],\n  \"max_leaf_depth\": " << s.maxLeafDepth << ",\n  \"mean_leaf_depth\": " << s.meanLeafDepth
       << "\n}\n";
    return os.str();
}

} // namespace argsplat
