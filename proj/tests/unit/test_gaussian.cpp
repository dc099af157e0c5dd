// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "support/check.hpp"
#include "support/oracles.hpp"

#include "argsplat/error.hpp"
#include "argsplat/gaussian.hpp"
#include "argsplat/synth.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

using namespace argsplat;
using oracle::LD;

namespace {

Gaussian3D
isotropic(Vec3 center, double sigma, double opacity = 1.0) {
    Gaussian3D g;
    g.center  = center;
    g.scale   = Vec3::Constant(sigma);
    g.opacity = opacity;
    return g;
}

bool
bitwiseEqual(const Gaussian3D &a, const Gaussian3D &b) {
    auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof(double)) == 0; };
    for (int i = 0; i < 3; ++i) {
        if (!same(a.center[i], b.center[i]) || !same(a.scale[i], b.scale[i]) || !same(a.dc[i], b.dc[i])) return false;
    }
    for (int i = 0; i < 4; ++i) {
        if (!same(a.rotation[i], b.rotation[i])) return false;
    }
    if (a.shRest.size() != b.shRest.size()) return false;
    for (std::size_t i = 0; i < a.shRest.size(); ++i) {
        if (!same(a.shRest[i], b.shRest[i])) return false;
    }
    return same(a.opacity, b.opacity);
}

} // namespace

TEST_CASE("covariance of unit scale and identity rotation is the identity") {
    const Mat3 c = covariance(Vec3(1, 1, 1), Quat{1, 0, 0, 0});
    CHECK((c - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("axis-aligned covariance squares the scales") {
    const Mat3 c = covariance(Vec3(2, 1, 1), Quat{1, 0, 0, 0});
    CHECK(c(0, 0) == 4.0);
    CHECK(c(1, 1) == 1.0);
    CHECK(c(2, 2) == 1.0);
    CHECK(c(0, 1) == 0.0);
}

TEST_CASE("covariance rejects non-positive scales") {
    CHECK_ERROR_CODE(covariance(Vec3(1, 0, 1), Quat{1, 0, 0, 0}), ErrorCode::InvalidParameter);
    CHECK_ERROR_CODE(covariance(Vec3(1, -2, 1), Quat{1, 0, 0, 0}), ErrorCode::InvalidParameter);
}

TEST_CASE("covariance matches an extended-precision product") {
    Rng rng(11);
    for (int t = 0; t < 500; ++t) {
        const Gaussian3D g = oracle::randomGaussian(rng, 0.01, 3.0);
        const Mat3 c       = covariance(g.scale, g.rotation);
        const auto ref     = oracle::covarianceL(g.scale, g.rotation);
        const double norm  = g.scale.cwiseAbs2().maxCoeff();
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                CHECK(std::fabs(c(i, j) - double(ref[i][j])) <= 1e-13 * norm);
                CHECK(std::fabs(c(i, j) - c(j, i)) <= 1e-12 * norm);
            }
        }
        const double detWant = std::pow(g.scale.prod(), 2.0);
        CHECK(oracle::relErr(c.determinant(), detWant) < 1e-9);

        Eigen::SelfAdjointEigenSolver<Mat3> es(c);
        std::array<double, 3> got{es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
        std::array<double, 3> want{g.scale[0] * g.scale[0], g.scale[1] * g.scale[1], g.scale[2] * g.scale[2]};
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        for (int i = 0; i < 3; ++i) CHECK(oracle::relErr(got[i], want[i]) < 1e-9);
    }
}

TEST_CASE("detCov is the squared scale product regardless of rotation") {
    Gaussian3D g;
    CHECK(detCov(g) == 1.0);
    g.scale    = Vec3(2, 1, 1);
    g.rotation = normalizedQuat({0.3, -0.2, 0.9, 0.1});
    CHECK(detCov(g) == doctest::Approx(4.0).epsilon(1e-15));
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        const Gaussian3D r = oracle::randomGaussian(rng);
        CHECK(oracle::relErr(detCov(r), oracle::detL(oracle::covarianceL(r))) < 1e-12);
    }
}

TEST_CASE("moments of unit gaussians") {
    const MomentSummary a = moments(isotropic(Vec3::Zero(), 1.0));
    const LD twoPi = 2 * std::numbers::pi_v<LD>;
    CHECK(std::fabs(a.m0 - twoPi * std::sqrt(twoPi)) < 1e-12);
    CHECK(a.m1.norm() == 0.0);

    const MomentSummary b = moments(isotropic(Vec3(1, 0, 0), 1.0, 0.5));
    CHECK(b.m0 == doctest::Approx(7.874804973).epsilon(1e-9));
    CHECK(b.m1[0] == doctest::Approx(7.874804973).epsilon(1e-9));
    CHECK(b.m1[1] == 0.0);
    CHECK(b.m1[2] == 0.0);
}

TEST_CASE("zeroth moment agrees with grid integration") {
    Rng rng(101);
    for (int t = 0; t < 20; ++t) {
        Gaussian3D g    = oracle::randomGaussian(rng, 0.1, 0.3);
        const double m0 = moments(g).m0;
        CHECK(oracle::relErr(m0, oracle::gridMass(g, 48)) < 1e-3);
    }
}

TEST_CASE("cross gaussian of a gaussian with itself") {
    Rng rng(3);
    const Gaussian3D g  = oracle::randomGaussian(rng);
    const CrossGaussian c = crossGaussian(g, g);
    CHECK((c.center - g.center).norm() < 1e-12);
    CHECK(c.opacity == g.opacity * g.opacity);
    CHECK((c.covariance - covariance(g) / 2.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cross gaussian of scaled identities has the scalar closed form") {
    const double a = 0.7, b = 1.9;
    Gaussian3D g1 = isotropic(Vec3(1, -2, 0.5), std::sqrt(a), 0.4);
    Gaussian3D g2 = isotropic(Vec3(-0.5, 3, 2), std::sqrt(b), 0.8);
    const CrossGaussian c = crossGaussian(g1, g2);
    const double s        = a * b / (a + b);
    CHECK((c.covariance - s * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    const Vec3 u = (b * g1.center + a * g2.center) / (a + b);
    CHECK((c.center - u).norm() < 1e-12);
    CHECK(c.opacity == doctest::Approx(0.32));
}

TEST_CASE("cross gaussian matches an extended-precision solve") {
    Rng rng(77);
    for (int t = 0; t < 300; ++t) {
        const Gaussian3D a = oracle::randomGaussian(rng);
        const Gaussian3D b = oracle::randomGaussian(rng);
        const CrossGaussian c = crossGaussian(a, b);
        const auto ref        = oracle::crossL(a, b);
        LD covNorm = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) covNorm = std::max(covNorm, std::fabs(ref.covariance[i][j]));
        for (int i = 0; i < 3; ++i) {
            CHECK(std::fabs(c.center[i] - ref.center[i]) <= 1e-9 * std::max<LD>(1, std::fabs(ref.center[i])));
            for (int j = 0; j < 3; ++j) CHECK(std::fabs(c.covariance(i, j) - ref.covariance[i][j]) <= 1e-9 * covNorm);
        }
    }
}

TEST_CASE("cross gaussian rejects ill-conditioned covariances") {
    Gaussian3D thin;
    thin.scale = Vec3(1.0, 1.0, 1e-8);
    Gaussian3D wide;
    wide.scale = Vec3(1e3, 1e3, 1e3);
    CHECK_ERROR_CODE(crossGaussian(thin, wide), ErrorCode::NumericalDegeneracy);
}

TEST_CASE("merging a gaussian with itself") {
    Rng rng(8);
    Gaussian3D g = oracle::randomGaussian(rng);
    g.opacity    = 0.3;
    const MergeOutput m = merge(g, g);
    CHECK((m.gaussian.center - g.center).norm() < 1e-12);
    CHECK(m.gaussian.opacity == doctest::Approx(2 * 0.3 - 0.09).epsilon(1e-14));
    for (int i = 0; i < 3; ++i) CHECK(m.gaussian.dc[i] == doctest::Approx(g.dc[i]).epsilon(1e-14));
}

TEST_CASE("mirror pair merges at the origin") {
    Rng rng(9);
    Gaussian3D a = oracle::randomGaussian(rng);
    Gaussian3D b = a;
    b.center     = -a.center;
    const MergeOutput m = merge(a, b);
    CHECK(m.gaussian.center.norm() < 1e-12);
}

TEST_CASE("isotropic equal-mass pair merges at the midpoint") {
    const Gaussian3D a = isotropic(Vec3(0.2, 0.1, -0.3), 0.4, 0.6);
    const Gaussian3D b = isotropic(Vec3(1.1, -0.7, 0.5), 0.4, 0.6);
    const MergeOutput m = merge(a, b);
    CHECK((m.gaussian.center - (a.center + b.center) / 2).norm() < 1e-9);
}

TEST_CASE("merge matches a straight-line extended-precision evaluation") {
    Rng rng(1234);
    for (int t = 0; t < 300; ++t) {
        const Gaussian3D a = oracle::randomGaussian(rng, 0.1, 0.6, 0.6);
        const Gaussian3D b = oracle::randomGaussian(rng, 0.1, 0.6, 0.6);
        const MergeOutput m = merge(a, b);
        const auto ref      = oracle::mergeL(a, b);
        CHECK(oracle::relErr(m.moments.m0, ref.m03) < 1e-9);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::fabs(m.gaussian.center[i] - ref.center[i]) < 1e-9 * std::max<LD>(1, std::fabs(ref.center[i])));
            CHECK(std::fabs(m.gaussian.dc[i] - ref.dc[i]) < 1e-9 * std::max<LD>(1, std::fabs(ref.dc[i])));
        }
        const Mat3 cov = covariance(m.gaussian);
        LD norm = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) norm = std::max(norm, std::fabs(ref.covariance[i][j]));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::fabs(cov(i, j) - ref.covariance[i][j]) < 1e-9 * norm);
        if (!m.opacityClamped) CHECK(oracle::relErr(m.gaussian.opacity, ref.opacity) < 1e-9);
    }
}

TEST_CASE("merge conserves moments against the cross term") {
    Rng rng(42);
    for (int t = 0; t < 1000; ++t) {
        const Gaussian3D a = oracle::randomGaussian(rng);
        const Gaussian3D b = oracle::randomGaussian(rng);
        const MergeOutput m = merge(a, b);
        const MomentSummary ma = moments(a), mb = moments(b);
        oracle::MatL cc{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cc[i][j] = m.cross.covariance(i, j);
        const LD m0c = oracle::massL(m.cross.opacity, cc);
        CHECK(oracle::relErr(LD(m.moments.m0) + m0c, LD(ma.m0) + mb.m0) < 1e-9);
        for (int i = 0; i < 3; ++i) {
            const LD lhs = LD(m.moments.m1[i]) + m0c * m.cross.center[i];
            const LD rhs = LD(ma.m1[i]) + mb.m1[i];
            CHECK(std::fabs(lhs - rhs) <= 1e-9 * std::max<LD>(std::fabs(rhs), LD(ma.m0) + mb.m0));
        }
    }
}

TEST_CASE("merge is bitwise symmetric") {
    Rng rng(99);
    for (int t = 0; t < 500; ++t) {
        Gaussian3D a = oracle::randomGaussian(rng);
        Gaussian3D b = oracle::randomGaussian(rng);
        a.shRest     = {0.1, -0.2, 0.3};
        CHECK(bitwiseEqual(merge(a, b).gaussian, merge(b, a).gaussian));
    }
}

TEST_CASE("merged gaussian stays valid and pads higher-order features") {
    Rng rng(2);
    Gaussian3D a = oracle::randomGaussian(rng);
    Gaussian3D b = oracle::randomGaussian(rng);
    a.shRest     = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const MergeOutput m = merge(a, b);
    REQUIRE(m.gaussian.shRest.size() == 6);
    const double wa = moments(a).m0, wb = moments(b).m0;
    CHECK(m.gaussian.shRest[5] == doctest::Approx(wa * 6.0 / (wa + wb)));
    CHECK_NOTHROW(validate(m.gaussian));
    CHECK(m.gaussian.opacity > 0.0);
    CHECK(m.gaussian.opacity <= 1.0);
    CHECK(m.gaussian.rotation[0] >= 0.0);
}

TEST_CASE("decomposition is canonical and reproduces the covariance") {
    Rng rng(17);
    for (int t = 0; t < 300; ++t) {
        const Gaussian3D g    = oracle::randomGaussian(rng, 0.01, 2.0);
        const Mat3 c          = covariance(g);
        const ScaleRotation d = decomposeCovariance(c);
        CHECK(d.scale[0] >= d.scale[1]);
        CHECK(d.scale[1] >= d.scale[2]);
        CHECK(d.rotation[0] >= 0.0);
        const Mat3 r = rotationMatrix(d.rotation);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((covariance(d.scale, d.rotation) - c).cwiseAbs().maxCoeff() < 1e-12 * c.cwiseAbs().maxCoeff() * 10);
    }
}

TEST_CASE("validate rejects broken gaussians") {
    Gaussian3D g;
    CHECK_NOTHROW(validate(g));
    g.opacity = 0.0;
    CHECK_THROWS_AS(validate(g), Error);
    g.opacity = 1.5;
    CHECK_THROWS_AS(validate(g), Error);
    g         = Gaussian3D{};
    g.scale   = Vec3(1, 0, 1);
    CHECK_THROWS_AS(validate(g), Error);
    g          = Gaussian3D{};
    g.center[1] = std::nan("");
    CHECK_THROWS_AS(validate(g), Error);
}

TEST_CASE("quaternion round trip through a rotation matrix") {
    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        const Quat q  = rng.rotation();
        const Quat q2 = normalizedQuat(quaternionFromMatrix(rotationMatrix(q)));
        for (int i = 0; i < 4; ++i) CHECK(q2[i] == doctest::Approx(q[i]).epsilon(1e-12));
    }
    const Quat z = normalizedQuat({0, 0, 0, 0});
    CHECK(z == Quat{1, 0, 0, 0});
}
