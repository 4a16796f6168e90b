#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ssr/common.hpp"

namespace ssr {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place radix-2 Cooley-Tukey on interleaved (re, im) pairs with an element
// stride given in complex units. Unnormalized; callers apply their own scale.
template <typename T>
void fft_radix2(T* data, int n, std::ptrdiff_t stride, bool inverse) {
    if (n == 1) return;
    if (!is_pow2(n)) throw ArgumentError("fft: length must be a power of two");
    std::ptrdiff_t st = stride * 2;  // scalar stride between complex elements

    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(data[i * st], data[j * st]);
            std::swap(data[i * st + 1], data[j * st + 1]);
        }
    }

    const T sign = inverse ? T(1) : T(-1);
    for (int len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * 3.14159265358979323846264338327950288 / len;
        T wr = static_cast<T>(std::cos(ang));
        T wi = static_cast<T>(std::sin(ang));
        for (int i = 0; i < n; i += len) {
            T cr = T(1), ci = T(0);
            for (int j = 0; j < len / 2; ++j) {
                T* u = data + (i + j) * st;
                T* v = data + (i + j + len / 2) * st;
                T vr = v[0] * cr - v[1] * ci;
                T vi = v[0] * ci + v[1] * cr;
                v[0] = u[0] - vr;
                v[1] = u[1] - vi;
                u[0] += vr;
                u[1] += vi;
                T ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

// Orthonormal 2-D FFT over an H x W grid of interleaved complex scalars
// (layout ... x H x W x 2, contiguous). Scales by 1/sqrt(HW) in both
// directions so the transform is unitary.
template <typename T>
void fft2_ortho(T* plane, int H, int W, bool inverse) {
    if (!is_pow2(H) || !is_pow2(W))
        throw ArgumentError("fft2: extents must be powers of two, got " + std::to_string(H) + "x" +
                            std::to_string(W));
    for (int r = 0; r < H; ++r) fft_radix2(plane + static_cast<std::ptrdiff_t>(r) * W * 2, W, 1, inverse);
    for (int c = 0; c < W; ++c) fft_radix2(plane + static_cast<std::ptrdiff_t>(c) * 2, H, W, inverse);
    T s = static_cast<T>(1.0 / std::sqrt(static_cast<double>(H) * W));
    std::size_t n = static_cast<std::size_t>(H) * W * 2;
    for (std::size_t i = 0; i < n; ++i) plane[i] *= s;
}

}  // namespace ssr
