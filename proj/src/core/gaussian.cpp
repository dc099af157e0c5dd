// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/gaussian.hpp"

#include "argsplat/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace argsplat {

namespace {

// Ratio of extreme eigenvalues of the summed precision above which the
// product covariance is treated as singular.
constexpr double kMaxConditionNumber = 1e14;

Mat3
symmetrized(const Mat3 &m) {
    Mat3 out;
    for (int i = 0; i < 3; ++i) {
        out(i, i) = m(i, i);
        for (int j = i + 1; j < 3; ++j) {
            const double v = (m(i, j) + m(j, i)) * 0.5;
            out(i, j)      = v;
            out(j, i)      = v;
        }
    }
    return out;
}

// R diag(d) R^T with the upper triangle mirrored.
Mat3
congruence(const Mat3 &r, const Vec3 &d) {
    Mat3 out;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) {
                acc += r(i, k) * d[k] * r(j, k);
            }
            out(i, j) = acc;
            out(j, i) = acc;
        }
    }
    return out;
}

} // namespace

void
validate(const Gaussian3D &g) {
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(g.center[i])) {
            fail(ErrorCode::InvalidParameter, "gaussian center is not finite");
        }
        if (!(g.scale[i] > 0.0) || !std::isfinite(g.scale[i])) {
            std::ostringstream os;
            os << "gaussian scale component " << i << " must be positive, got " << g.scale[i];
            fail(ErrorCode::InvalidParameter, os.str());
        }
    }
    if (!(g.opacity > 0.0 && g.opacity <= 1.0)) {
        std::ostringstream os;
        os << "gaussian opacity must lie in (0, 1], got " << g.opacity;
        fail(ErrorCode::InvalidParameter, os.str());
    }
    const auto &q     = g.rotation;
    const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (!(std::abs(norm - 1.0) <= 1e-6)) {
        std::ostringstream os;
        os << "gaussian rotation quaternion is not normalized (|q| = " << norm << ")";
        fail(ErrorCode::InvalidParameter, os.str());
    }
}

Quat
normalizedQuat(const Quat &q) {
    const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        return {1.0, 0.0, 0.0, 0.0};
    }
    Quat out = {q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm};
    if (out[0] < 0.0) {
        for (auto &c : out) {
            c = -c;
        }
    }
    return out;
}

Mat3
rotationMatrix(const Quat &q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

Quat
quaternionFromMatrix(const Mat3 &r) {
    // Shepperd: pick the largest of the four diagonal combinations as pivot.
    const double trace = r(0, 0) + r(1, 1) + r(2, 2);
    Quat q;
    if (trace >= r(0, 0) && trace >= r(1, 1) && trace >= r(2, 2)) {
        const double s = std::sqrt(1.0 + trace) * 2.0;
        q              = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
                          (r(1, 0) - r(0, 1)) / s};
    } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
        const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
        q              = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
                          (r(0, 2) + r(2, 0)) / s};
    } else if (r(1, 1) >= r(2, 2)) {
        const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
        q              = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
                          (r(1, 2) + r(2, 1)) / s};
    } else {
        const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
        q              = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
                          (r(1, 2) + r(2, 1)) / s, 0.25 * s};
    }
    return normalizedQuat(q);
}

Mat3
covariance(const Vec3 &scale, const Quat &rotation) {
    for (int i = 0; i < 3; ++i) {
        if (!(scale[i] > 0.0)) {
            fail(ErrorCode::InvalidParameter, "covariance requires strictly positive scale");
        }
    }
    return congruence(rotationMatrix(rotation), scale.cwiseProduct(scale));
}

Mat3
covariance(const Gaussian3D &g) {
    return covariance(g.scale, g.rotation);
}

Mat3
precision(const Gaussian3D &g) {
    const Vec3 inv = g.scale.cwiseProduct(g.scale).cwiseInverse();
    return congruence(rotationMatrix(g.rotation), inv);
}

double
detCov(const Gaussian3D &g) {
    const double v = g.scale[0] * g.scale[1] * g.scale[2];
    return v * v;
}

MomentSummary
moments(const Gaussian3D &g) {
    MomentSummary m;
    m.m0 = g.opacity * kGaussianMassConstant * (g.scale[0] * g.scale[1] * g.scale[2]);
    m.m1 = m.m0 * g.center;
    return m;
}

CrossGaussian
crossGaussian(const Gaussian3D &a, const Gaussian3D &b) {
    const Mat3 pa = precision(a);
    const Mat3 pb = precision(b);
    const Mat3 sum = pa + pb;

    Eigen::SelfAdjointEigenSolver<Mat3> es(sum, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()[0];
    const double hi = es.eigenvalues()[2];
    if (es.info() != Eigen::Success || !(lo > 0.0) || hi / lo > kMaxConditionNumber) {
        fail(ErrorCode::NumericalDegeneracy, "cross gaussian: summed precision is singular");
    }

    CrossGaussian c;
    c.opacity    = a.opacity * b.opacity;
    c.covariance = symmetrized(sum.inverse());
    c.center     = c.covariance * (pa * a.center + pb * b.center);
    return c;
}

ScaleRotation
decomposeCovariance(const Mat3 &cov) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    if (es.info() != Eigen::Success) {
        fail(ErrorCode::NumericalDegeneracy, "eigendecomposition of merged covariance failed");
    }
    // Eigen returns ascending eigenvalues.
    std::array<Vec3, 2> axes;
    Vec3 lambda;
    for (int k = 0; k < 3; ++k) {
        lambda[k] = es.eigenvalues()[2 - k];
    }
    for (int k = 0; k < 2; ++k) {
        Vec3 v = es.eigenvectors().col(2 - k);
        int pivot = 0;
        for (int i = 1; i < 3; ++i) {
            if (std::abs(v[i]) > std::abs(v[pivot])) {
                pivot = i;
            }
        }
        if (v[pivot] < 0.0) {
            v = -v;
        }
        axes[k] = v;
    }
    Mat3 r;
    r.col(0) = axes[0];
    r.col(1) = axes[1];
    r.col(2) = axes[0].cross(axes[1]);

    ScaleRotation out;
    for (int k = 0; k < 3; ++k) {
        out.scale[k] = std::max(std::sqrt(std::max(lambda[k], 0.0)), kMinScale);
    }
    out.rotation = quaternionFromMatrix(r);
    return out;
}

MergeOutput
merge(const Gaussian3D &a, const Gaussian3D &b) {
    const MomentSummary ma = moments(a);
    const MomentSummary mb = moments(b);
    const CrossGaussian c  = crossGaussian(a, b);

    const double detC = std::max(c.covariance.determinant(), 0.0);
    const double m0c  = c.opacity * kGaussianMassConstant * std::sqrt(detC);
    const Vec3 m1c    = m0c * c.center;

    MergeOutput out;
    out.cross      = c;
    out.moments.m0 = ma.m0 + mb.m0 - m0c;
    out.moments.m1 = (ma.m1 + mb.m1) - m1c;
    if (!(out.moments.m0 > 0.0) || !std::isfinite(out.moments.m0)) {
        fail(ErrorCode::DegenerateMerge, "merged zeroth moment is not positive");
    }

    Gaussian3D &g = out.gaussian;
    g.center      = out.moments.m1 / out.moments.m0;

    double opacity = a.opacity + b.opacity - c.opacity;
    if (opacity > 1.0) {
        opacity            = 1.0;
        out.opacityClamped = true;
    } else if (!(opacity > 0.0)) {
        opacity            = std::numeric_limits<double>::min();
        out.opacityClamped = true;
    }
    g.opacity = opacity;

    const Mat3 fused = (ma.m0 * covariance(a) + mb.m0 * covariance(b)) / out.moments.m0;
    const auto sr    = decomposeCovariance(symmetrized(fused));
    g.scale          = sr.scale;
    g.rotation       = sr.rotation;

    const double wsum = ma.m0 + mb.m0;
    for (int i = 0; i < 3; ++i) {
        g.dc[i] = (ma.m0 * a.dc[i] + mb.m0 * b.dc[i]) / wsum;
    }
    // Missing higher-order coefficients count as zero.
    g.shRest.assign(std::max(a.shRest.size(), b.shRest.size()), 0.0);
    for (std::size_t i = 0; i < g.shRest.size(); ++i) {
        const double fa = i < a.shRest.size() ? a.shRest[i] : 0.0;
        const double fb = i < b.shRest.size() ? b.shRest[i] : 0.0;
        g.shRest[i]     = (ma.m0 * fa + mb.m0 * fb) / wsum;
    }
    return out;
}

const char *
toString(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidParameter: return "invalid parameter";
    case ErrorCode::NumericalDegeneracy: return "numerical degeneracy";
    case ErrorCode::DegenerateMerge: return "degenerate merge";
    case ErrorCode::InsufficientPopulation: return "insufficient population";
    case ErrorCode::InvalidTarget: return "invalid target";
    case ErrorCode::InconsistentSequence: return "inconsistent sequence";
    case ErrorCode::NotFullySimplified: return "not fully simplified";
    case ErrorCode::Inconsistency: return "inconsistency";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::ImageTooSmall: return "image too small";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Format: return "format error";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::BadVersion: return "unsupported version";
    case ErrorCode::Truncated: return "truncated data";
    case ErrorCode::Unsupported: return "unsupported variant";
    }
    return "unknown error";
}

} // namespace argsplat
