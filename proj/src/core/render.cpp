// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/render.hpp"

#include "argsplat/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

namespace argsplat {

void
validate(const Camera &cam) {
    const Mat3 err = cam.rotation * cam.rotation.transpose() - Mat3::Identity();
    if (!(err.cwiseAbs().maxCoeff() <= 1e-6)) {
        fail(ErrorCode::InvalidParameter, "camera rotation is not orthonormal");
    }
    if (!(cam.fx > 0.0 && cam.fy > 0.0)) {
        fail(ErrorCode::InvalidParameter, "camera focal lengths must be positive");
    }
}

std::optional<Projected>
project(const Gaussian3D &g, const Camera &cam) {
    const Vec3 t = cam.rotation * g.center + cam.translation;
    if (!(t[2] > kNearPlane)) {
        return std::nullopt;
    }
    const double invZ  = 1.0 / t[2];
    const double invZ2 = invZ * invZ;

    Eigen::Matrix<double, 2, 3> j;
    j << cam.fx * invZ, 0.0, -cam.fx * t[0] * invZ2,
         0.0, cam.fy * invZ, -cam.fy * t[1] * invZ2;
    const Eigen::Matrix<double, 2, 3> jw = j * cam.rotation;

    Projected p;
    p.mean  = {cam.fx * t[0] * invZ + cam.cx, cam.fy * t[1] * invZ + cam.cy};
    p.cov   = jw * covariance(g) * jw.transpose();
    p.cov(0, 1) = p.cov(1, 0) = 0.5 * (p.cov(0, 1) + p.cov(1, 0));
    p.cov(0, 0) += kCovarianceFloor;
    p.cov(1, 1) += kCovarianceFloor;
    p.depth = t[2];
    return p;
}

namespace {

struct Splat {
    double mx, my;
    double ia, ib, ic; // inverse 2D covariance [[ia, ib], [ib, ic]]
    double opacity;
    float rgb[3];
    std::int64_t x0, x1, y0, y1; // inclusive pixel bounds
};

// Beyond this Mahalanobis radius o * exp(-q/2) < 1e-12 for every o <= 1,
// far below what a float image can resolve.
constexpr double kCutoffSq = 2.0 * 27.631021115928547; // 2 ln(1e12)

std::vector<Splat>
prepare(const GaussianSet &set, const Camera &cam) {
    struct Item {
        double depth;
        std::size_t index;
        Projected p;
    };
    std::vector<Item> items;
    items.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (auto p = project(set.gaussians[i], cam)) {
            items.push_back({p->depth, i, *p});
        }
    }
    std::stable_sort(items.begin(), items.end(), [](const Item &a, const Item &b) { return a.depth < b.depth; });

    std::vector<Splat> splats;
    splats.reserve(items.size());
    for (const Item &it : items) {
        const Gaussian3D &g = set.gaussians[it.index];
        const Eigen::Matrix2d &c = it.p.cov;
        const double det = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
        if (!(det > 0.0)) {
            continue;
        }
        Splat s;
        s.mx = it.p.mean[0];
        s.my = it.p.mean[1];
        s.ia = c(1, 1) / det;
        s.ib = -c(0, 1) / det;
        s.ic = c(0, 0) / det;
        s.opacity = g.opacity;
        for (int k = 0; k < 3; ++k) {
            s.rgb[k] = static_cast<float>(std::clamp(0.5 + kShC0 * g.dc[k], 0.0, 1.0));
        }
        // Bounding box of the cutoff ellipse: half-extent sqrt(cutoff * cov_ii).
        const double rx = std::sqrt(kCutoffSq * c(0, 0));
        const double ry = std::sqrt(kCutoffSq * c(1, 1));
        // Pixel centres sit at (x + 0.5, y + 0.5).
        s.x0 = static_cast<std::int64_t>(std::floor(s.mx - rx - 0.5));
        s.x1 = static_cast<std::int64_t>(std::ceil(s.mx + rx - 0.5));
        s.y0 = static_cast<std::int64_t>(std::floor(s.my - ry - 0.5));
        s.y1 = static_cast<std::int64_t>(std::ceil(s.my + ry - 0.5));
        if (s.x1 < 0 || s.y1 < 0 || s.x0 >= cam.width || s.y0 >= cam.height) {
            continue;
        }
        splats.push_back(s);
    }
    return splats;
}

void
renderRows(const std::vector<Splat> &splats, Image &img, std::uint32_t rowBegin, std::uint32_t rowEnd) {
    for (std::uint32_t y = rowBegin; y < rowEnd; ++y) {
        const double py = y + 0.5;
        for (std::uint32_t x = 0; x < img.width; ++x) {
            const double px = x + 0.5;
            double transmittance = 1.0;
            double acc[3] = {0.0, 0.0, 0.0};
            for (const Splat &s : splats) {
                if (x < s.x0 || x > s.x1 || y < s.y0 || y > s.y1) {
                    continue;
                }
                const double dx = px - s.mx;
                const double dy = py - s.my;
                const double q  = s.ia * dx * dx + 2.0 * s.ib * dx * dy + s.ic * dy * dy;
                if (q > kCutoffSq) {
                    continue;
                }
                const double alpha = std::min(kMaxAlpha, s.opacity * std::exp(-0.5 * q));
                const double w = alpha * transmittance;
                for (int k = 0; k < 3; ++k) {
                    acc[k] += s.rgb[k] * w;
                }
                transmittance *= 1.0 - alpha;
                if (transmittance < kMinTransmittance) {
                    break;
                }
            }
            for (int k = 0; k < 3; ++k) {
                img.at(x, y, k) = static_cast<float>(std::clamp(acc[k], 0.0, 1.0));
            }
        }
    }
}

} // namespace

Image
render(const GaussianSet &set, const Camera &cam, unsigned workers) {
    validate(cam);
    Image img(cam.width, cam.height);
    const std::vector<Splat> splats = prepare(set, cam);
    workers = std::clamp<unsigned>(workers, 1, std::max<std::uint32_t>(cam.height, 1));
    if (workers == 1) {
        renderRows(splats, img, 0, cam.height);
        return img;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const auto begin = static_cast<std::uint32_t>(std::uint64_t(cam.height) * w / workers);
        const auto end   = static_cast<std::uint32_t>(std::uint64_t(cam.height) * (w + 1) / workers);
        pool.emplace_back(renderRows, std::cref(splats), std::ref(img), begin, end);
    }
    for (auto &t : pool) {
        t.join();
    }
    return img;
}

std::vector<Camera>
orbitCameras(const GaussianSet &set, std::size_t count, std::uint32_t width, std::uint32_t height) {
    if (width == 0 || height == 0) {
        fail(ErrorCode::InvalidParameter, "image size must be positive");
    }
    Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
    if (!set.empty()) {
        lo = hi = set.gaussians.front().center;
        for (const auto &g : set.gaussians) {
            lo = lo.cwiseMin(g.center);
            hi = hi.cwiseMax(g.center);
        }
    }
    const Vec3 centre = 0.5 * (lo + hi);
    double radius = 0.0;
    for (const auto &g : set.gaussians) {
        radius = std::max(radius, (g.center - centre).norm());
    }
    radius = std::max(radius, 1e-3);

    const double elevation = 20.0 * std::numbers::pi / 180.0;
    const double distance  = 2.0 * radius;
    // The bounding sphere subtends 30 degrees; 35 leaves a margin.
    const double focal = 0.5 * std::min(width, height) / std::tan(35.0 * std::numbers::pi / 180.0);
    const Vec3 up(0.0, 0.0, 1.0);

    std::vector<Camera> cams;
    cams.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double azimuth = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        const Vec3 eye = centre + distance * Vec3(std::cos(elevation) * std::cos(azimuth),
                                                  std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
        const Vec3 forward = (centre - eye).normalized();
        const Vec3 right   = forward.cross(up).normalized();
        const Vec3 down    = forward.cross(right);
        Camera cam;
        cam.rotation.row(0) = right;
        cam.rotation.row(1) = down;
        cam.rotation.row(2) = forward;
        cam.translation     = -cam.rotation * eye;
        cam.fx = cam.fy = focal;
        cam.cx = 0.5 * width;
        cam.cy = 0.5 * height;
        cam.width  = width;
        cam.height = height;
        cams.push_back(cam);
    }
    return cams;
}

} // namespace argsplat
