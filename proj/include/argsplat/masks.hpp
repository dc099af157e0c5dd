// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/hierarchy.hpp"
#include "argsplat/tokenize.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace argsplat {

enum class MaskVariant : std::uint8_t {
    Causal = 0,
    Levelwise = 1,
    Tree = 2,
    /// Tree variant admitting every earlier internal node, not just ancestors.
    TreeAllInternal = 3,
};

const char *toString(MaskVariant v) noexcept;

/// Dense query x key visibility over token sequence positions.
class AttentionMask {
  public:
    AttentionMask() = default;
    AttentionMask(std::size_t n, MaskVariant variant) : mN(n), mVariant(variant), mAllowed(n * n, 0) {}

    std::size_t size() const noexcept { return mN; }
    MaskVariant variant() const noexcept { return mVariant; }

    bool allowed(std::size_t query, std::size_t key) const { return mAllowed[query * mN + key] != 0; }
    void set(std::size_t query, std::size_t key, bool v = true) { mAllowed[query * mN + key] = v ? 1 : 0; }

    /// Rows of '0'/'1', one line per query.
    std::string toText() const;

    bool operator==(const AttentionMask &) const = default;

  private:
    std::size_t mN = 0;
    MaskVariant mVariant = MaskVariant::Causal;
    std::vector<std::uint8_t> mAllowed;
};

AttentionMask causalMask(std::size_t n);

/// Query created at level l > 0 sees itself and frontier N_{l-1}; the root
/// sees only itself.
AttentionMask levelwiseMask(const TokenStream &tokens, const HierarchyTree &tree);

/// Levelwise plus every strict ancestor of the query (or, with
/// `allInternal`, every internal node created before the query's level).
AttentionMask treeMask(const TokenStream &tokens, const HierarchyTree &tree, bool allInternal = false);

AttentionMask buildMask(MaskVariant variant, const TokenStream &tokens, const HierarchyTree &tree);

/// For each level l = 0..L, the number of distinct keys read by the queries
/// created at level l.
std::vector<std::size_t> decodeCost(const HierarchyTree &tree, MaskVariant variant);

} // namespace argsplat
