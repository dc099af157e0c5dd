// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/error.hpp"
#include "argsplat/render.hpp"

#include <array>
#include <cmath>

namespace argsplat {

namespace {

constexpr int kWindow = 11;
constexpr int kRadius = kWindow / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void
checkShapes(const Image &a, const Image &b) {
    if (a.width != b.width || a.height != b.height || a.data.size() != b.data.size()) {
        fail(ErrorCode::ShapeMismatch, "images differ in size");
    }
}

std::array<double, kWindow>
gaussianTaps() {
    std::array<double, kWindow> taps{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kRadius;
        taps[i]        = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
        sum += taps[i];
    }
    for (double &t : taps) {
        t /= sum;
    }
    return taps;
}

// Valid-region separable filter of a single-channel plane.
std::vector<double>
filterValid(const std::vector<double> &plane, int w, int h, const std::array<double, kWindow> &taps) {
    const int ow = w - 2 * kRadius;
    const int oh = h - 2 * kRadius;
    std::vector<double> rows(std::size_t(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += taps[k] * plane[std::size_t(y) * w + x + k];
            }
            rows[std::size_t(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(std::size_t(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += taps[k] * rows[std::size_t(y + k) * ow + x];
            }
            out[std::size_t(y) * ow + x] = acc;
        }
    }
    return out;
}

} // namespace

double
psnr(const Image &a, const Image &b) {
    checkShapes(a, b);
    if (a.data.empty()) {
        return kPsnrCap;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = double(a.data[i]) - double(b.data[i]);
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.data.size());
    if (mse < 1e-10) {
        return kPsnrCap;
    }
    return 10.0 * std::log10(1.0 / mse);
}

double
ssim(const Image &a, const Image &b) {
    checkShapes(a, b);
    if (a.width < kWindow || a.height < kWindow) {
        fail(ErrorCode::ImageTooSmall, "ssim needs images of at least 11x11 pixels");
    }
    const int w = static_cast<int>(a.width);
    const int h = static_cast<int>(a.height);
    const auto taps = gaussianTaps();
    const std::size_t px = std::size_t(w) * h;

    double total = 0.0;
    std::vector<double> x(px), y(px), xx(px), yy(px), xy(px);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < px; ++i) {
            x[i]  = a.data[i * 3 + c];
            y[i]  = b.data[i * 3 + c];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx  = filterValid(x, w, h, taps);
        const auto my  = filterValid(y, w, h, taps);
        const auto mxx = filterValid(xx, w, h, taps);
        const auto myy = filterValid(yy, w, h, taps);
        const auto mxy = filterValid(xy, w, h, taps);
        double sum = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx  = mxx[i] - mx[i] * mx[i];
            const double vy  = myy[i] - my[i] * my[i];
            const double cxy = mxy[i] - mx[i] * my[i];
            sum += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
        }
        total += sum / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

} // namespace argsplat
