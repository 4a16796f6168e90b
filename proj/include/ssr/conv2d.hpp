#pragma once

#include <memory>

#include "ssr/tape.hpp"

namespace ssr::tg {

// All convolutions are 3x3 with zero padding 1. `Same` is stride 1 at fixed
// resolution, `Down` is strided (output ceil(H/s) x ceil(W/s)), `Up` is the
// exact transpose of `Down` (output H*s x W*s). Kernels are stored as
// [3][3][Cin][Cout]; in Up mode the kernel's Cin axis indexes the *output*
// channels so that <Down(x), y> == <x, Up(y)> holds for a shared kernel.
enum class ConvMode { Same, Down, Up };

namespace conv_detail {

template <typename T>
std::vector<T> transpose_taps(const Tensor<T>& k);

template <typename T>
void gather_forward(const Tensor<T>& in, const Tensor<T>& k, const Tensor<T>& b, int s,
                    Tensor<T>& out) {
    int H = in.dim(0), W = in.dim(1), Ci = in.dim(2);
    int Ho = out.dim(0), Wo = out.dim(1), Co = out.dim(2);
    const T* pk = k.data();
    std::vector<T> kt;
    if (Co < Ci) kt = transpose_taps(k);  // [tap][co][ci] for the narrow-output path
    for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
            T* po = &out.at(oy, ox, 0);
            for (int c = 0; c < Co; ++c) po[c] = b[static_cast<std::size_t>(c)];
            for (int ky = 0; ky < 3; ++ky) {
                int iy = oy * s - 1 + ky;
                if (iy < 0 || iy >= H) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    int ix = ox * s - 1 + kx;
                    if (ix < 0 || ix >= W) continue;
                    const T* pi = &in.at(iy, ix, 0);
                    if (Co >= Ci) {
                        const T* pw = pk + ((ky * 3 + kx) * Ci) * Co;
                        for (int ci = 0; ci < Ci; ++ci) {
                            T a = pi[ci];
                            const T* pwc = pw + ci * Co;
                            for (int c = 0; c < Co; ++c) po[c] += a * pwc[c];
                        }
                    } else {
                        const T* pwt = kt.data() + static_cast<std::size_t>((ky * 3 + kx) * Ci) * Co;
                        for (int c = 0; c < Co; ++c) {
                            const T* row = pwt + static_cast<std::size_t>(c) * Ci;
                            T acc = T(0);
#pragma omp simd reduction(+ : acc)
                            for (int ci = 0; ci < Ci; ++ci) acc += row[ci] * pi[ci];
                            po[c] += acc;
                        }
                    }
                }
            }
        }
    }
}

// Per-tap transpose of the kernel's channel block, so pullback loops run as
// contiguous FMAs instead of scalar reductions.
template <typename T>
std::vector<T> transpose_taps(const Tensor<T>& k) {
    int A = k.dim(2), B = k.dim(3);
    std::vector<T> kt(k.numel());
    const T* pk = k.data();
    for (int tap = 0; tap < 9; ++tap) {
        const T* src = pk + static_cast<std::size_t>(tap) * A * B;
        T* dst = kt.data() + static_cast<std::size_t>(tap) * A * B;
        for (int a = 0; a < A; ++a)
            for (int b = 0; b < B; ++b) dst[static_cast<std::size_t>(b) * A + a] = src[static_cast<std::size_t>(a) * B + b];
    }
    return kt;
}

// Accumulating pullbacks for the gather form; `gin`/`gk`/`gb` may be null.
template <typename T>
void gather_backward(const Tensor<T>& in, const Tensor<T>& k, int s, const Tensor<T>& go,
                     Tensor<T>* gin, Tensor<T>* gk, Tensor<T>* gb) {
    int H = in.dim(0), W = in.dim(1), Ci = in.dim(2);
    int Ho = go.dim(0), Wo = go.dim(1), Co = go.dim(2);
    std::vector<T> kt;
    if (gin) kt = transpose_taps(k);  // [tap][co][ci]
    for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
            const T* pg = &go.at(oy, ox, 0);
            if (gb) {
                T* pb = gb->data();
                for (int c = 0; c < Co; ++c) pb[c] += pg[c];
            }
            for (int ky = 0; ky < 3; ++ky) {
                int iy = oy * s - 1 + ky;
                if (iy < 0 || iy >= H) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    int ix = ox * s - 1 + kx;
                    if (ix < 0 || ix >= W) continue;
                    const T* pi = &in.at(iy, ix, 0);
                    if (gin) {
                        T* pgi = &gin->at(iy, ix, 0);
                        if (Ci >= Co) {
                            // wide input: contiguous FMA over ci
                            const T* pwt =
                                kt.data() + static_cast<std::size_t>((ky * 3 + kx) * Ci) * Co;
                            for (int c = 0; c < Co; ++c) {
                                T g = pg[c];
                                const T* row = pwt + static_cast<std::size_t>(c) * Ci;
                                for (int ci = 0; ci < Ci; ++ci) pgi[ci] += row[ci] * g;
                            }
                        } else {
                            // wide output: vectorized reduction over co
                            const T* pw =
                                k.data() + static_cast<std::size_t>((ky * 3 + kx) * Ci) * Co;
                            for (int ci = 0; ci < Ci; ++ci) {
                                const T* pwc = pw + static_cast<std::size_t>(ci) * Co;
                                T acc = T(0);
#pragma omp simd reduction(+ : acc)
                                for (int c = 0; c < Co; ++c) acc += pwc[c] * pg[c];
                                pgi[ci] += acc;
                            }
                        }
                    }
                    if (gk) {
                        T* pgw = gk->data() + static_cast<std::size_t>((ky * 3 + kx) * Ci) * Co;
                        for (int ci = 0; ci < Ci; ++ci) {
                            T a = pi[ci];
                            T* pgwc = pgw + static_cast<std::size_t>(ci) * Co;
                            for (int c = 0; c < Co; ++c) pgwc[c] += a * pg[c];
                        }
                    }
                }
            }
        }
    }
}

// Transposed (scatter) form. Input is the coarse grid; kernel [3][3][Ca][Cb]
// with Cb == input channels, Ca == output channels.
template <typename T>
void scatter_forward(const Tensor<T>& in, const Tensor<T>& k, const Tensor<T>& b, int s,
                     Tensor<T>& out) {
    int H = in.dim(0), W = in.dim(1), Cb = in.dim(2);
    int Ho = out.dim(0), Wo = out.dim(1), Ca = out.dim(2);
    std::vector<T> kt = transpose_taps(k);  // [tap][cb][ca]
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = b[i % static_cast<std::size_t>(Ca)];
    for (int qy = 0; qy < H; ++qy) {
        for (int qx = 0; qx < W; ++qx) {
            const T* pi = &in.at(qy, qx, 0);
            for (int ky = 0; ky < 3; ++ky) {
                int py = qy * s - 1 + ky;
                if (py < 0 || py >= Ho) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    int px = qx * s - 1 + kx;
                    if (px < 0 || px >= Wo) continue;
                    T* po = &out.at(py, px, 0);
                    if (Ca >= Cb) {
                        const T* pwt = kt.data() + static_cast<std::size_t>((ky * 3 + kx) * Ca) * Cb;
                        for (int cb = 0; cb < Cb; ++cb) {
                            T v = pi[cb];
                            const T* row = pwt + static_cast<std::size_t>(cb) * Ca;
                            for (int a = 0; a < Ca; ++a) po[a] += row[a] * v;
                        }
                    } else {
                        const T* pw = k.data() + static_cast<std::size_t>((ky * 3 + kx) * Ca) * Cb;
                        for (int a = 0; a < Ca; ++a) {
                            const T* pwa = pw + static_cast<std::size_t>(a) * Cb;
                            T acc = T(0);
#pragma omp simd reduction(+ : acc)
                            for (int cb = 0; cb < Cb; ++cb) acc += pwa[cb] * pi[cb];
                            po[a] += acc;
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void scatter_backward(const Tensor<T>& in, const Tensor<T>& k, int s, const Tensor<T>& go,
                      Tensor<T>* gin, Tensor<T>* gk, Tensor<T>* gb) {
    int H = in.dim(0), W = in.dim(1), Cb = in.dim(2);
    int Ho = go.dim(0), Wo = go.dim(1), Ca = go.dim(2);
    const T* pk = k.data();
    if (gb) {
        T* pb = gb->data();
        const T* pg = go.data();
        for (std::size_t i = 0; i < go.numel(); ++i) pb[i % static_cast<std::size_t>(Ca)] += pg[i];
    }
    for (int qy = 0; qy < H; ++qy) {
        for (int qx = 0; qx < W; ++qx) {
            const T* pi = &in.at(qy, qx, 0);
            T* pgi = gin ? &gin->at(qy, qx, 0) : nullptr;
            for (int ky = 0; ky < 3; ++ky) {
                int py = qy * s - 1 + ky;
                if (py < 0 || py >= Ho) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    int px = qx * s - 1 + kx;
                    if (px < 0 || px >= Wo) continue;
                    const T* pg = &go.at(py, px, 0);
                    const T* pw = pk + ((ky * 3 + kx) * Ca) * Cb;
                    if (gin) {
                        for (int a = 0; a < Ca; ++a) {
                            T gv = pg[a];
                            const T* pwa = pw + a * Cb;
                            for (int cb = 0; cb < Cb; ++cb) pgi[cb] += pwa[cb] * gv;
                        }
                    }
                    if (gk) {
                        T* pgw = gk->data() + ((ky * 3 + kx) * Ca) * Cb;
                        for (int a = 0; a < Ca; ++a) {
                            T gv = pg[a];
                            T* pgwa = pgw + a * Cb;
                            for (int cb = 0; cb < Cb; ++cb) pgwa[cb] += gv * pi[cb];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace conv_detail

template <typename T>
struct Conv2dNode : OpNode<T> {
    Conv2dNode(ConvMode m, int s) : mode(m), stride(s) {}
    const char* name() const override { return "conv2d"; }
    void backward(Tape<T>& t) override {
        const Tensor<T>& go = t.grad_buf(this->out);
        const Tensor<T>& in = t.value(this->in[0]);
        const Tensor<T>& k = t.value(this->in[1]);
        Tensor<T>* gin = t.needs_grad(this->in[0]) ? &t.grad_buf(this->in[0]) : nullptr;
        Tensor<T>* gk = t.needs_grad(this->in[1]) ? &t.grad_buf(this->in[1]) : nullptr;
        Tensor<T>* gb = t.needs_grad(this->in[2]) ? &t.grad_buf(this->in[2]) : nullptr;
        if (mode == ConvMode::Up)
            conv_detail::scatter_backward(in, k, stride, go, gin, gk, gb);
        else
            conv_detail::gather_backward(in, k, stride, go, gin, gk, gb);
    }
    ConvMode mode;
    int stride;
};

template <typename T>
Val<T> conv2d(Val<T> input, Val<T> kernel, Val<T> bias, int stride, ConvMode mode) {
    const Tensor<T>& in = input.value();
    const Tensor<T>& k = kernel.value();
    const Tensor<T>& b = bias.value();
    if (stride <= 0) throw ArgumentError("conv2d: stride must be positive");
    if (mode == ConvMode::Same && stride != 1)
        throw ArgumentError("conv2d: mode=same requires stride 1");
    if (in.ndim() != 3) throw ShapeError("conv2d: input must be HxWxC");
    if (k.ndim() != 4 || k.dim(0) != 3 || k.dim(1) != 3)
        throw ShapeError("conv2d: kernel must be 3x3xCinxCout");

    int H = in.dim(0), W = in.dim(1), C = in.dim(2);
    Tensor<T> out;
    if (mode == ConvMode::Up) {
        if (k.dim(3) != C)
            throw ShapeError("conv2d up: input channels " + std::to_string(C) +
                             " do not match kernel Cout " + std::to_string(k.dim(3)));
        int Ca = k.dim(2);
        if (static_cast<int>(b.numel()) != Ca)
            throw ShapeError("conv2d up: bias length must equal output channel count");
        out = Tensor<T>({H * stride, W * stride, Ca});
        conv_detail::scatter_forward(in, k, b, stride, out);
    } else {
        if (k.dim(2) != C)
            throw ShapeError("conv2d: input channels " + std::to_string(C) +
                             " do not match kernel Cin " + std::to_string(k.dim(2)));
        int Co = k.dim(3);
        if (static_cast<int>(b.numel()) != Co)
            throw ShapeError("conv2d: bias length must equal Cout");
        int Ho = (H - 1) / stride + 1, Wo = (W - 1) / stride + 1;
        out = Tensor<T>({Ho, Wo, Co});
        conv_detail::gather_forward(in, k, b, stride, out);
    }

    Tape<T>& tape = *input.tape;
    Val<T> o = tape.result(std::move(out), {input.id, kernel.id, bias.id});
    auto node = std::make_unique<Conv2dNode<T>>(mode, stride);
    node->in = {input.id, kernel.id, bias.id};
    node->out = o.id;
    tape.record(std::move(node));
    return o;
}

}  // namespace ssr::tg
