// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace argsplat {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion stored as (w, x, y, z).
using Quat = std::array<double, 4>;

inline constexpr double kMinScale = 1e-8;

/// (2*pi)^(3/2)
inline constexpr double kGaussianMassConstant = 15.749609945722419;

/// One anisotropic splat primitive. `dc` is the degree-0 SH colour; `shRest`
/// carries any higher-order coefficients verbatim.
struct Gaussian3D {
    Vec3 center = Vec3::Zero();
    double opacity = 1.0;
    Vec3 scale = Vec3::Ones();
    Quat rotation = {1.0, 0.0, 0.0, 0.0};
    std::array<double, 3> dc = {0.0, 0.0, 0.0};
    std::vector<double> shRest;

    bool operator==(const Gaussian3D &) const = default;
};

struct MomentSummary {
    double m0 = 0.0;
    Vec3 m1 = Vec3::Zero();
};

/// Product term of two Gaussians, used to discount their overlap.
struct CrossGaussian {
    Vec3 center = Vec3::Zero();
    double opacity = 0.0;
    Mat3 covariance = Mat3::Zero();
};

struct MergeOutput {
    Gaussian3D gaussian;
    MomentSummary moments;
    CrossGaussian cross;
    bool opacityClamped = false;
};

/// Throws InvalidParameter unless scale > 0, |q| = 1 +- 1e-6 and opacity in (0, 1].
void validate(const Gaussian3D &g);

Mat3 rotationMatrix(const Quat &q);

/// Quaternion (w >= 0) of a proper rotation matrix.
Quat quaternionFromMatrix(const Mat3 &r);

Quat normalizedQuat(const Quat &q);

/// R diag(scale^2) R^T, exactly symmetric.
Mat3 covariance(const Vec3 &scale, const Quat &rotation);
Mat3 covariance(const Gaussian3D &g);

/// R diag(scale^-2) R^T, exactly symmetric.
Mat3 precision(const Gaussian3D &g);

/// det(Sigma) = (sx sy sz)^2, independent of rotation.
double detCov(const Gaussian3D &g);

MomentSummary moments(const Gaussian3D &g);

/// Throws NumericalDegeneracy when the summed precision is ill conditioned.
CrossGaussian crossGaussian(const Gaussian3D &a, const Gaussian3D &b);

struct ScaleRotation {
    Vec3 scale;
    Quat rotation;
};

/// Canonical (scale, rotation) of a symmetric PSD matrix: eigenvalues
/// descending, each eigenvector's largest-magnitude entry positive, third axis
/// = e0 x e1, w >= 0. Scales are floored at kMinScale.
ScaleRotation decomposeCovariance(const Mat3 &cov);

/// Moment-preserving pairwise merge. Symmetric in its arguments bit for bit.
MergeOutput merge(const Gaussian3D &a, const Gaussian3D &b);

} // namespace argsplat
