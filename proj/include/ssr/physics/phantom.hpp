#pragma once

#include <array>
#include <cmath>

#include "ssr/rng.hpp"
#include "ssr/tensor.hpp"

namespace ssr::phys {

using tg::Tensor;

enum class Modality { MRI, CT };

inline Modality modality_from_name(const std::string& s) {
    if (s == "mri") return Modality::MRI;
    if (s == "ct") return Modality::CT;
    throw ArgumentError("unknown modality: " + s);
}

inline std::string modality_name(Modality m) { return m == Modality::MRI ? "mri" : "ct"; }

namespace phantom_detail {

struct Ellipse {
    double value, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan ellipse set; intensities keep the summed image in [0, 1].
inline const std::array<Ellipse, 10>& base_ellipses() {
    static const std::array<Ellipse, 10> e = {{
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
        {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
        {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
        {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
        {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
        {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
        {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
        {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
        {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
    }};
    return e;
}

}  // namespace phantom_detail

// Jittered Shepp-Logan magnitude image on an H x H grid, values in [0, 1].
// Ellipse centers move by up to 5% of the half-FOV, axes and intensities by
// up to 10%. Rasterized with 4x4 subpixel averaging so edges are
// band-limited rather than hard.
template <typename T>
Tensor<T> shepp_logan_magnitude(int H, int W, std::uint64_t seed) {
    using phantom_detail::Ellipse;
    std::array<Ellipse, 10> ells = phantom_detail::base_ellipses();
    Rng rng(mix_seed(seed, 0x7068616eull));  // "phan"
    for (auto& e : ells) {
        e.x0 += rng.uniform(-0.05, 0.05);
        e.y0 += rng.uniform(-0.05, 0.05);
        e.a *= 1.0 + rng.uniform(-0.1, 0.1);
        e.b *= 1.0 + rng.uniform(-0.1, 0.1);
        e.value *= 1.0 + rng.uniform(-0.1, 0.1);
    }
    struct Prepared {
        double v, inv_a2, inv_b2, x0, y0, c, s;
    };
    std::array<Prepared, 10> prep;
    for (std::size_t i = 0; i < ells.size(); ++i) {
        double phi = ells[i].phi_deg * 3.14159265358979323846 / 180.0;
        prep[i] = {ells[i].value, 1.0 / (ells[i].a * ells[i].a), 1.0 / (ells[i].b * ells[i].b),
                   ells[i].x0,    ells[i].y0,                    std::cos(phi),
                   std::sin(phi)};
    }

    Tensor<T> img({H, W, 1});
    const int ss = 4;
    const double inv_ss2 = 1.0 / (ss * ss);
    for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
            double acc = 0.0;
            for (int sy = 0; sy < ss; ++sy) {
                double y = -(2.0 * (h + (sy + 0.5) / ss) / H - 1.0);
                for (int sx = 0; sx < ss; ++sx) {
                    double x = 2.0 * (w + (sx + 0.5) / ss) / W - 1.0;
                    double v = 0.0;
                    for (const auto& e : prep) {
                        double dx = x - e.x0, dy = y - e.y0;
                        double xr = dx * e.c + dy * e.s;
                        double yr = -dx * e.s + dy * e.c;
                        if (xr * xr * e.inv_a2 + yr * yr * e.inv_b2 <= 1.0) v += e.v;
                    }
                    acc += v;
                }
            }
            double m = acc * inv_ss2;
            img.at(h, w, 0) = static_cast<T>(std::min(1.0, std::max(0.0, m)));
        }
    }
    return img;
}

// Phantom image for one modality. MRI phantoms are complex (H x W x 2) with
// a smooth low-order polynomial phase bounded by pi/2; CT phantoms are the
// plain magnitude (H x W x 1).
template <typename T>
Tensor<T> gen_phantom(int H, int W, std::uint64_t seed, Modality kind) {
    Tensor<T> mag = shepp_logan_magnitude<T>(H, W, seed);
    if (kind == Modality::CT) return mag;

    Rng rng(mix_seed(seed, 0x70686173ull));  // "phas"
    double c[6];
    for (double& v : c) v = rng.uniform(-1.0, 1.0);
    double peak = 0.0;
    auto poly = [&](double x, double y) {
        return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
    };
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double x = 2.0 * (w + 0.5) / W - 1.0, y = 2.0 * (h + 0.5) / H - 1.0;
            peak = std::max(peak, std::abs(poly(x, y)));
        }
    double gain = peak > 0 ? (3.14159265358979323846 / 2.0) / peak : 0.0;

    Tensor<T> img({H, W, 2});
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double x = 2.0 * (w + 0.5) / W - 1.0, y = 2.0 * (h + 0.5) / H - 1.0;
            double phase = gain * poly(x, y);
            double m = static_cast<double>(mag.at(h, w, 0));
            img.at(h, w, 0) = static_cast<T>(m * std::cos(phase));
            img.at(h, w, 1) = static_cast<T>(m * std::sin(phase));
        }
    return img;
}

// Synthetic coil sensitivities: Gaussian magnitude profiles centered at
// equally spaced positions on the image border, each with a smooth linear
// phase, normalized so sum_i |c_i|^2 = 1 at every pixel.
template <typename T>
Tensor<T> gen_coils(int H, int W, int n_coils) {
    if (n_coils < 1) throw ArgumentError("gen_coils: need at least one coil");
    Tensor<T> coils({n_coils, H, W, 2});
    const double cy = (H - 1) / 2.0, cx = (W - 1) / 2.0;
    const double radius = 0.5 * std::max(H, W);
    const double sigma = 0.6 * std::min(H, W);
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    for (int i = 0; i < n_coils; ++i) {
        double ang = 2.0 * 3.14159265358979323846 * i / n_coils;
        double py = cy + radius * std::sin(ang);
        double px = cx + radius * std::cos(ang);
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                double d2 = (h - py) * (h - py) + (w - px) * (w - px);
                double m = std::exp(-d2 * inv_two_sigma2);
                double phase = 0.5 * ((h - cy) * std::sin(ang) + (w - cx) * std::cos(ang)) /
                               std::max(H, W) * 3.14159265358979323846;
                std::size_t base = ((static_cast<std::size_t>(i) * H + h) * W + w) * 2;
                coils[base] = static_cast<T>(m * std::cos(phase));
                coils[base + 1] = static_cast<T>(m * std::sin(phase));
            }
    }
    // pointwise normalization
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double s = 0.0;
            for (int i = 0; i < n_coils; ++i) {
                std::size_t base = ((static_cast<std::size_t>(i) * H + h) * W + w) * 2;
                s += static_cast<double>(coils[base]) * coils[base] +
                     static_cast<double>(coils[base + 1]) * coils[base + 1];
            }
            double inv = 1.0 / std::sqrt(s);
            for (int i = 0; i < n_coils; ++i) {
                std::size_t base = ((static_cast<std::size_t>(i) * H + h) * W + w) * 2;
                coils[base] = static_cast<T>(coils[base] * inv);
                coils[base + 1] = static_cast<T>(coils[base + 1] * inv);
            }
        }
    return coils;
}

}  // namespace ssr::phys
