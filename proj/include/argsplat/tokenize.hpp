// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/hierarchy.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace argsplat {

inline constexpr std::size_t kTokenAttributes = 14;
inline constexpr std::uint32_t kTokenBins = 256;
inline constexpr std::uint32_t kNoParent = 0xFFFFFFFFu;

/// Attribute slots of a token.
enum TokenAttribute : std::size_t {
    kCenterX = 0, kCenterY, kCenterZ,
    kScaleX, kScaleY, kScaleZ,
    kRotW, kRotX, kRotY, kRotZ,
    kOpacity,
    kColorR, kColorG, kColorB,
};

/// Per-attribute ranges. Scale ranges are stored in log space.
struct QuantSpec {
    std::array<double, kTokenAttributes> min{};
    std::array<double, kTokenAttributes> max{};
    std::array<bool, kTokenAttributes> logScale{};
    /// Set where an empty range had to be widened.
    std::array<bool, kTokenAttributes> widened{};

    double binWidth(std::size_t attr) const { return (max[attr] - min[attr]) / kTokenBins; }

    bool operator==(const QuantSpec &) const = default;
};

using TokenBins = std::array<std::uint8_t, kTokenAttributes>;

struct TokenRecord {
    TokenBins bins{};
    bool splittable = false;
    std::uint32_t nodeId = 0;
    std::uint32_t parentId = kNoParent;
    std::uint32_t level = 0;

    bool operator==(const TokenRecord &) const = default;
};

struct TokenStream {
    QuantSpec spec;
    std::uint32_t depth = 0;
    std::vector<TokenRecord> tokens;

    bool operator==(const TokenStream &) const = default;
};

/// The 14 continuous attributes in token order (scales not yet log-mapped,
/// quaternion sign-canonicalized).
std::array<double, kTokenAttributes> tokenAttributes(const Gaussian3D &g);

/// Quaternion sign fixed so the first non-zero component is positive.
Quat canonicalQuat(const Quat &q);

/// Ranges over every Gaussian in `sets`. Quaternion range is [-1, 1] and
/// opacity [0, 1]; degenerate ranges are widened by 1e-6.
QuantSpec fitQuantSpec(std::span<const GaussianSet> sets);

/// Floor binning; out-of-range values clamp and bump `clampCount` if given.
TokenBins quantize(const Gaussian3D &g, const QuantSpec &spec, std::size_t *clampCount = nullptr);

/// Bin-centre reconstruction with a renormalized quaternion.
Gaussian3D dequantize(const TokenBins &bins, const QuantSpec &spec);

/// Scalar helpers used by the two functions above.
std::uint8_t quantizeValue(double v, std::size_t attr, const QuantSpec &spec, bool *clamped = nullptr);
double dequantizeValue(std::uint8_t bin, std::size_t attr, const QuantSpec &spec);

/// Tokens ordered by (created level, parent position, child index).
TokenStream tokenizeTree(const HierarchyTree &tree, const QuantSpec &spec);

/// Every node of the tree, leaves and internal, as a set ordered by id.
GaussianSet allNodes(const HierarchyTree &tree);

/// Dequantized frontier `level` of a token stream: tokens created at that
/// level plus earlier non-splittable ones.
GaussianSet tokenFrontier(const TokenStream &stream, std::size_t level);

} // namespace argsplat
