// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "argsplat/simplify.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace argsplat {

/// Pinhole camera, OpenCV axes (x right, y down, z forward).
struct Camera {
    Mat3 rotation = Mat3::Identity(); // world -> camera
    Vec3 translation = Vec3::Zero();
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    std::uint32_t width = 0, height = 0;
};

/// Throws InvalidParameter for a non-orthonormal rotation or non-positive focal.
void validate(const Camera &cam);

/// H x W x 3 interleaved RGB in [0, 1].
struct Image {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<float> data;

    Image() = default;
    Image(std::uint32_t w, std::uint32_t h) : width(w), height(h), data(std::size_t(w) * h * 3, 0.0f) {}

    float &at(std::uint32_t x, std::uint32_t y, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
    float at(std::uint32_t x, std::uint32_t y, int c) const { return data[(std::size_t(y) * width + x) * 3 + c]; }

    bool operator==(const Image &) const = default;
};

struct Projected {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
    double depth = 0.0;
};

inline constexpr double kNearPlane = 0.01;
inline constexpr double kCovarianceFloor = 0.3;
inline constexpr double kMaxAlpha = 0.99;
inline constexpr double kMinTransmittance = 1e-4;
inline constexpr double kShC0 = 0.28209479177387814;

/// Perspective splat projection; nullopt when the centre is at or behind
/// the near plane.
std::optional<Projected> project(const Gaussian3D &g, const Camera &cam);

/// Front-to-back compositing over a black background. Rows are split across
/// `workers` threads; the output does not depend on the split.
Image render(const GaussianSet &set, const Camera &cam, unsigned workers = 1);

/// `count` cameras on a circle of radius 2x the bounding-sphere radius of the
/// centres, at 20 degrees elevation, all looking at the sphere centre.
std::vector<Camera> orbitCameras(const GaussianSet &set, std::size_t count, std::uint32_t width,
                                 std::uint32_t height);

/// 10 log10(1/MSE), 100 dB when MSE < 1e-10.
double psnr(const Image &a, const Image &b);

/// Mean SSIM (11x11 Gaussian window, sigma 1.5, valid region), averaged over
/// channels.
double ssim(const Image &a, const Image &b);

inline constexpr double kPsnrCap = 100.0;

} // namespace argsplat
