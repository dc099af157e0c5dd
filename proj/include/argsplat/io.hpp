// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/masks.hpp"
#include "argsplat/render.hpp"
#include "argsplat/simplify.hpp"
#include "argsplat/tokenize.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace argsplat::io {

inline constexpr std::uint16_t kSetVersion = 1;
inline constexpr std::uint16_t kSequenceVersion = 1;
inline constexpr std::uint16_t kTokenVersion = 1;
inline constexpr std::uint16_t kMaskVersion = 1;

/// ARGT flag: children of every split are stored selected-child first.
inline constexpr std::uint32_t kTokenFlagSelectedChildFirst = 1u << 31;

std::string readFile(const std::filesystem::path &path);
void writeFile(const std::filesystem::path &path, std::string_view bytes);

// Splat PLY (binary little endian, 3DGS checkpoint layout). Loading applies
// sigmoid/exp activations and normalizes quaternions; ids are file order.
GaussianSet decodePly(std::string_view bytes);
std::string encodePly(const GaussianSet &set);
GaussianSet loadPly(const std::filesystem::path &path);
void savePly(const GaussianSet &set, const std::filesystem::path &path);

// "ARGX": exact native set with ids.
std::string encodeSet(const GaussianSet &set);
GaussianSet decodeSet(std::string_view bytes);

// "ARGS": merge sequence.
std::string encodeSequence(const MergeSequence &seq);
MergeSequence decodeSequence(std::string_view bytes);

// "ARGT": token stream.
std::string encodeTokens(const TokenStream &tokens);
TokenStream decodeTokens(std::string_view bytes);

// "ARGM": bit-packed mask, row-major, LSB first.
std::string encodeMask(const AttentionMask &mask);
AttentionMask decodeMask(std::string_view bytes);

// Images: binary PPM (P6, 8 bit) and float32 raw ("ARGF", w, h, channels).
std::string encodePpm(const Image &img);
Image decodePpm(std::string_view bytes);
std::string encodeRaw(const Image &img);
Image decodeRaw(std::string_view bytes);

} // namespace argsplat::io
