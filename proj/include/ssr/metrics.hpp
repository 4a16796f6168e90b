#pragma once

#include <cmath>
#include <vector>

#include "ssr/tensor.hpp"

namespace ssr::metrics {

using tg::Tensor;

// Reduces an H x W x P image to the magnitude plane used for scoring:
// complex modulus for two-channel images, the raw plane otherwise.
template <typename T>
Tensor<double> magnitude_image(const Tensor<T>& img) {
    if (img.ndim() != 3) throw ShapeError("magnitude_image expects HxWxC");
    int H = img.dim(0), W = img.dim(1), C = img.dim(2);
    Tensor<double> out({H, W});
    if (C == 2) {
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                out.at2(h, w) = std::hypot(static_cast<double>(img.at(h, w, 0)),
                                           static_cast<double>(img.at(h, w, 1)));
    } else if (C == 1) {
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) out.at2(h, w) = static_cast<double>(img.at(h, w, 0));
    } else {
        throw ShapeError("magnitude_image: expected 1 or 2 channels");
    }
    return out;
}

inline constexpr double kPsnrCap = 99.0;  // sentinel for identical images

// 10 log10(peak^2 / MSE) on magnitude planes, peak taken from the reference.
inline double psnr(const Tensor<double>& recon, const Tensor<double>& ref) {
    check_same_shape(recon, ref, "psnr");
    double peak = 0.0, mse = 0.0;
    for (std::size_t i = 0; i < ref.numel(); ++i) {
        peak = std::max(peak, std::abs(ref[i]));
        double d = recon[i] - ref[i];
        mse += d * d;
    }
    if (peak <= 0.0) throw ArgumentError("psnr: reference image has zero peak");
    mse /= static_cast<double>(ref.numel());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

template <typename T>
double psnr(const Tensor<T>& recon, const Tensor<T>& ref) {
    return psnr(magnitude_image(recon), magnitude_image(ref));
}

namespace ssim_detail {

inline std::vector<double> gaussian_window(int radius, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        w[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable Gaussian filter evaluated only where the full window fits.
inline Tensor<double> filter_valid(const Tensor<double>& img, const std::vector<double>& win) {
    int H = img.dim(0), W = img.dim(1);
    int r = static_cast<int>(win.size() / 2);
    Tensor<double> rows({H, W - 2 * r});
    for (int h = 0; h < H; ++h)
        for (int w = r; w < W - r; ++w) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k) acc += win[static_cast<std::size_t>(k + r)] * img.at2(h, w + k);
            rows.at2(h, w - r) = acc;
        }
    Tensor<double> out({H - 2 * r, W - 2 * r});
    for (int h = r; h < H - r; ++h)
        for (int w = 0; w < W - 2 * r; ++w) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k) acc += win[static_cast<std::size_t>(k + r)] * rows.at2(h + k, w);
            out.at2(h - r, w) = acc;
        }
    return out;
}

}  // namespace ssim_detail

// Mean local SSIM with the canonical 11x11 Gaussian window (sigma 1.5,
// K1 = 0.01, K2 = 0.03); dynamic range is the reference peak. Computed over
// positions where the full window fits.
inline double ssim(const Tensor<double>& recon, const Tensor<double>& ref) {
    check_same_shape(recon, ref, "ssim");
    int H = ref.dim(0), W = ref.dim(1);
    const int radius = 5;
    if (H < 2 * radius + 1 || W < 2 * radius + 1)
        throw ArgumentError("ssim: image smaller than the 11x11 window");
    double peak = 0.0;
    for (std::size_t i = 0; i < ref.numel(); ++i) peak = std::max(peak, std::abs(ref[i]));
    if (peak <= 0.0) throw ArgumentError("ssim: reference image has zero peak");
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);

    auto win = ssim_detail::gaussian_window(radius, 1.5);
    Tensor<double> xy({H, W}), xx({H, W}), yy({H, W});
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double a = recon.at2(h, w), b = ref.at2(h, w);
            xy.at2(h, w) = a * b;
            xx.at2(h, w) = a * a;
            yy.at2(h, w) = b * b;
        }
    Tensor<double> mx = ssim_detail::filter_valid(recon, win);
    Tensor<double> my = ssim_detail::filter_valid(ref, win);
    Tensor<double> mxy = ssim_detail::filter_valid(xy, win);
    Tensor<double> mxx = ssim_detail::filter_valid(xx, win);
    Tensor<double> myy = ssim_detail::filter_valid(yy, win);

    double acc = 0.0;
    for (std::size_t i = 0; i < mx.numel(); ++i) {
        double sxy = mxy[i] - mx[i] * my[i];
        double sxx = mxx[i] - mx[i] * mx[i];
        double syy = myy[i] - my[i] * my[i];
        double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * sxy + c2);
        double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (sxx + syy + c2);
        acc += num / den;
    }
    return acc / static_cast<double>(mx.numel());
}

template <typename T>
double ssim(const Tensor<T>& recon, const Tensor<T>& ref) {
    return ssim(magnitude_image(recon), magnitude_image(ref));
}

// Per-sample metric rows plus aggregates for report CSVs.
struct MetricReport {
    std::vector<double> psnr_values;
    std::vector<double> ssim_values;

    void add(double p, double s) {
        psnr_values.push_back(p);
        ssim_values.push_back(s);
    }

    static std::pair<double, double> mean_std(const std::vector<double>& v) {
        if (v.empty()) return {0.0, 0.0};
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size());
        return {mean, std::sqrt(var)};
    }

    double mean_psnr() const { return mean_std(psnr_values).first; }
    double mean_ssim() const { return mean_std(ssim_values).first; }
};

}  // namespace ssr::metrics
