// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace argsplat {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::size_t cases = 0;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyReport {
    std::vector<SuiteResult> suites;

    std::size_t failures() const;
    std::string toJson() const;
};

/// Runs the built-in oracle equivalence suites on seeded synthetic fixtures:
/// accelerated vs exhaustive simplification, reversibility, leaf identity,
/// mask oracles, quantization bounds, SSIM reference and format roundtrips.
VerifyReport runVerification(std::uint64_t seed);

} // namespace argsplat
