#pragma once

#include <cmath>
#include <vector>

#include "ssr/fft.hpp"
#include "ssr/physics/phantom.hpp"
#include "ssr/physics/sampling.hpp"
#include "ssr/rng.hpp"
#include "ssr/tensor.hpp"

namespace ssr::phys {

struct DegenerateError : Error {
    using Error::Error;
};

// Imaging operator A normalized to unit spectral norm. MRI is masked
// multi-coil Fourier (A = P F C with an orthonormal FFT); CT is a discrete
// parallel-beam Radon transform with unit-step ray sampling and bilinear
// interpolation. The adjoint is the exact transpose of the discrete forward
// map; both are divided by the power-iteration estimate lambda.
template <typename T>
class ImagingOperator {
  public:
    static ImagingOperator make_mri(SamplingMask mask, Tensor<T> coils) {
        if (coils.ndim() != 4 || coils.dim(3) != 2)
            throw ShapeError("mri operator: coils must be n_coils x H x W x 2");
        if (coils.dim(1) != mask.H || coils.dim(2) != mask.W)
            throw ShapeError("mri operator: coil and mask extents differ");
        if (!is_pow2(mask.H) || !is_pow2(mask.W))
            throw ArgumentError("mri operator: extents must be powers of two");
        ImagingOperator op;
        op.modality_ = Modality::MRI;
        op.H_ = mask.H;
        op.W_ = mask.W;
        op.mask_ = std::move(mask);
        op.coils_ = std::move(coils);
        op.n_coils_ = op.coils_.dim(0);
        // centered layout -> DFT index order
        op.mask_dft_.assign(static_cast<std::size_t>(op.H_) * op.W_, 0);
        for (int h = 0; h < op.H_; ++h)
            for (int w = 0; w < op.W_; ++w)
                op.mask_dft_[static_cast<std::size_t>(h) * op.W_ + w] =
                    op.mask_.at((h + op.H_ / 2) % op.H_, (w + op.W_ / 2) % op.W_) ? 1 : 0;
        op.lambda_ = op.estimate_norm();
        return op;
    }

    static ImagingOperator make_ct(int H, int W, int n_views_full, std::vector<int> views,
                                   int n_det = 0) {
        if (H != W) throw ArgumentError("ct operator: image must be square");
        if (static_cast<int>(views.size()) < 1) throw ArgumentError("ct operator: no views");
        ImagingOperator op;
        op.modality_ = Modality::CT;
        op.H_ = H;
        op.W_ = W;
        op.n_views_full_ = n_views_full;
        op.views_ = std::move(views);
        op.n_det_ = n_det > 0 ? n_det : default_detectors(H, W);
        op.lambda_ = op.estimate_norm();
        return op;
    }

    static int default_detectors(int H, int W) {
        return 2 * static_cast<int>(std::ceil(std::hypot(H, W) / 2.0)) + 1;
    }

    Modality modality() const { return modality_; }
    int height() const { return H_; }
    int width() const { return W_; }
    int n_coils() const { return n_coils_; }
    int n_det() const { return n_det_; }
    int n_views_full() const { return n_views_full_; }
    const std::vector<int>& views() const { return views_; }
    const SamplingMask& mask() const { return mask_; }
    const Tensor<T>& coils() const { return coils_; }
    T lambda() const { return lambda_; }

    // image channel count: 2 for complex MRI, 1 for CT
    int image_channels() const { return modality_ == Modality::MRI ? 2 : 1; }

    tg::Shape image_shape() const { return {H_, W_, image_channels()}; }

    tg::Shape meas_shape() const {
        if (modality_ == Modality::MRI) return {n_coils_, H_, W_, 2};
        return {static_cast<int>(views_.size()), n_det_};
    }

    Tensor<T> forward(const Tensor<T>& x) const {
        Tensor<T> y = forward_raw(x);
        T inv = T(1) / lambda_;
        for (std::size_t i = 0; i < y.numel(); ++i) y[i] *= inv;
        return y;
    }

    Tensor<T> adjoint(const Tensor<T>& y) const {
        Tensor<T> x = adjoint_raw(y);
        T inv = T(1) / lambda_;
        for (std::size_t i = 0; i < x.numel(); ++i) x[i] *= inv;
        return x;
    }

    Tensor<T> forward_raw(const Tensor<T>& x) const {
        return modality_ == Modality::MRI ? mri_forward_raw(x) : radon_forward_raw(x);
    }

    Tensor<T> adjoint_raw(const Tensor<T>& y) const {
        return modality_ == Modality::MRI ? mri_adjoint_raw(y) : radon_adjoint_raw(y);
    }

    // 30-step power iteration on A^t A from a fixed-seed start; returns the
    // square root of the final Rayleigh quotient. `normalized` probes the
    // lambda-scaled maps instead of the raw ones.
    T estimate_norm(int iters = 30, bool normalized = false) const {
        Rng rng(0x73706563u);  // fixed stream: repeated estimates are identical
        std::size_t n = static_cast<std::size_t>(H_) * W_ * image_channels();
        Tensor<T> v(image_shape());
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<T>(rng.uniform(-1.0, 1.0));
        double q = 0.0;
        for (int it = 0; it < iters; ++it) {
            Tensor<T> w = normalized ? adjoint(forward(v)) : adjoint_raw(forward_raw(v));
            double vv = 0.0, vw = 0.0, ww = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                vv += static_cast<double>(v[i]) * v[i];
                vw += static_cast<double>(v[i]) * w[i];
                ww += static_cast<double>(w[i]) * w[i];
            }
            if (ww <= 0.0 || vv <= 0.0)
                throw DegenerateError("power iteration: operator annihilated the probe vector");
            q = vw / vv;
            double inv = 1.0 / std::sqrt(ww);
            for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<T>(w[i] * inv);
        }
        if (q <= 0.0) throw DegenerateError("power iteration: non-positive Rayleigh quotient");
        return static_cast<T>(std::sqrt(q));
    }

  private:
    Tensor<T> mri_forward_raw(const Tensor<T>& x) const {
        if (x.dims() != image_shape()) throw ShapeError("mri forward: bad image shape");
        Tensor<T> y({n_coils_, H_, W_, 2});
        std::size_t plane = static_cast<std::size_t>(H_) * W_ * 2;
        for (int ci = 0; ci < n_coils_; ++ci) {
            T* out = y.data() + ci * plane;
            const T* cm = coils_.data() + ci * plane;
            const T* px = x.data();
            for (std::size_t p = 0; p < plane; p += 2) {
                out[p] = cm[p] * px[p] - cm[p + 1] * px[p + 1];
                out[p + 1] = cm[p] * px[p + 1] + cm[p + 1] * px[p];
            }
            fft2_ortho(out, H_, W_, false);
            for (std::size_t p = 0; p < plane / 2; ++p)
                if (!mask_dft_[p]) out[2 * p] = out[2 * p + 1] = T(0);
        }
        return y;
    }

    Tensor<T> mri_adjoint_raw(const Tensor<T>& y) const {
        if (y.dims() != meas_shape()) throw ShapeError("mri adjoint: bad k-space shape");
        Tensor<T> x(image_shape());
        std::size_t plane = static_cast<std::size_t>(H_) * W_ * 2;
        std::vector<T> buf(plane);
        for (int ci = 0; ci < n_coils_; ++ci) {
            const T* in = y.data() + ci * plane;
            const T* cm = coils_.data() + ci * plane;
            for (std::size_t p = 0; p < plane / 2; ++p) {
                buf[2 * p] = mask_dft_[p] ? in[2 * p] : T(0);
                buf[2 * p + 1] = mask_dft_[p] ? in[2 * p + 1] : T(0);
            }
            fft2_ortho(buf.data(), H_, W_, true);
            T* px = x.data();
            for (std::size_t p = 0; p < plane; p += 2) {
                // multiply by conj(c)
                px[p] += cm[p] * buf[p] + cm[p + 1] * buf[p + 1];
                px[p + 1] += cm[p] * buf[p + 1] - cm[p + 1] * buf[p];
            }
        }
        return x;
    }

    // Ray geometry shared by the Radon pair: view angle theta = pi * v / n_full,
    // detector offset s, sample parameter t, pixel position
    // (y, x) = center + s * (sin t., cos t.)... see body. Samples step at unit
    // pixel spacing; bilinear weights are reused exactly by the adjoint.
    template <typename Fn>
    void for_each_ray_sample(int vi, int d, Fn&& fn) const {
        double theta = 3.14159265358979323846 * views_[static_cast<std::size_t>(vi)] /
                       static_cast<double>(n_views_full_);
        double ct = std::cos(theta), st = std::sin(theta);
        double cy = (H_ - 1) / 2.0, cx = (W_ - 1) / 2.0;
        double s = d - (n_det_ - 1) / 2.0;
        int tmax = static_cast<int>(std::ceil(std::hypot(H_, W_) / 2.0)) + 1;
        for (int t = -tmax; t <= tmax; ++t) {
            double x = s * ct - t * st + cx;
            double y = s * st + t * ct + cy;
            int ix = static_cast<int>(std::floor(x));
            int iy = static_cast<int>(std::floor(y));
            double fx = x - ix, fy = y - iy;
            const double w00 = (1 - fy) * (1 - fx), w01 = (1 - fy) * fx;
            const double w10 = fy * (1 - fx), w11 = fy * fx;
            if (iy >= 0 && iy < H_ && ix >= 0 && ix < W_ && w00 != 0.0) fn(iy, ix, w00);
            if (iy >= 0 && iy < H_ && ix + 1 >= 0 && ix + 1 < W_ && w01 != 0.0) fn(iy, ix + 1, w01);
            if (iy + 1 >= 0 && iy + 1 < H_ && ix >= 0 && ix < W_ && w10 != 0.0) fn(iy + 1, ix, w10);
            if (iy + 1 >= 0 && iy + 1 < H_ && ix + 1 >= 0 && ix + 1 < W_ && w11 != 0.0)
                fn(iy + 1, ix + 1, w11);
        }
    }

    Tensor<T> radon_forward_raw(const Tensor<T>& x) const {
        if (x.dims() != image_shape()) throw ShapeError("radon forward: bad image shape");
        int nv = static_cast<int>(views_.size());
        Tensor<T> sino({nv, n_det_});
        for (int vi = 0; vi < nv; ++vi)
            for (int d = 0; d < n_det_; ++d) {
                double acc = 0.0;
                for_each_ray_sample(vi, d, [&](int iy, int ix, double w) {
                    acc += w * static_cast<double>(x.at(iy, ix, 0));
                });
                sino.at2(vi, d) = static_cast<T>(acc);
            }
        return sino;
    }

    Tensor<T> radon_adjoint_raw(const Tensor<T>& sino) const {
        if (sino.dims() != meas_shape()) throw ShapeError("radon adjoint: bad sinogram shape");
        int nv = static_cast<int>(views_.size());
        Tensor<T> x(image_shape());
        for (int vi = 0; vi < nv; ++vi)
            for (int d = 0; d < n_det_; ++d) {
                double v = static_cast<double>(sino.at2(vi, d));
                if (v == 0.0) continue;
                for_each_ray_sample(vi, d, [&](int iy, int ix, double w) {
                    x.at(iy, ix, 0) += static_cast<T>(w * v);
                });
            }
        return x;
    }

    Modality modality_ = Modality::MRI;
    int H_ = 0, W_ = 0;
    T lambda_ = T(1);
    // MRI
    SamplingMask mask_;
    Tensor<T> coils_;
    int n_coils_ = 0;
    std::vector<std::uint8_t> mask_dft_;
    // CT
    int n_views_full_ = 0;
    int n_det_ = 0;
    std::vector<int> views_;
};

// Filtered back projection with a Ram-Lak (ramp) filter. Rows are
// de-normalized by lambda, zero-padded to the next power of two, filtered in
// the frequency domain, then backprojected with angular weight pi / n_views.
template <typename T>
Tensor<T> fbp(const Tensor<T>& sino, const ImagingOperator<T>& op) {
    if (op.modality() != Modality::CT) throw ArgumentError("fbp: operator is not CT");
    if (sino.dims() != op.meas_shape()) throw ShapeError("fbp: bad sinogram shape");
    int nv = static_cast<int>(op.views().size());
    int nd = op.n_det();
    if (nv < 2) throw ArgumentError("fbp: need at least two views");
    int Np = next_pow2(2 * nd);

    Tensor<T> filtered({nv, nd});
    std::vector<T> row(static_cast<std::size_t>(Np) * 2);
    std::vector<double> ramp(static_cast<std::size_t>(Np));
    for (int m = 0; m < Np; ++m) {
        int k = m <= Np / 2 ? m : Np - m;
        ramp[static_cast<std::size_t>(m)] = static_cast<double>(k) / Np;
    }
    for (int v = 0; v < nv; ++v) {
        std::fill(row.begin(), row.end(), T(0));
        for (int d = 0; d < nd; ++d) row[2 * static_cast<std::size_t>(d)] = sino.at2(v, d) * op.lambda();
        fft_radix2(row.data(), Np, 1, false);
        for (int m = 0; m < Np; ++m) {
            row[2 * static_cast<std::size_t>(m)] *= static_cast<T>(ramp[static_cast<std::size_t>(m)]);
            row[2 * static_cast<std::size_t>(m) + 1] *= static_cast<T>(ramp[static_cast<std::size_t>(m)]);
        }
        fft_radix2(row.data(), Np, 1, true);
        T inv = T(1) / static_cast<T>(Np);
        for (int d = 0; d < nd; ++d) filtered.at2(v, d) = row[2 * static_cast<std::size_t>(d)] * inv;
    }

    int H = op.height(), W = op.width();
    Tensor<T> img({H, W, 1});
    double cy = (H - 1) / 2.0, cx = (W - 1) / 2.0;
    double wang = 3.14159265358979323846 / nv;
    for (int v = 0; v < nv; ++v) {
        double theta = 3.14159265358979323846 * op.views()[static_cast<std::size_t>(v)] /
                       static_cast<double>(op.n_views_full());
        double ct = std::cos(theta), st = std::sin(theta);
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                double s = (w - cx) * ct + (h - cy) * st;
                double u = s + (nd - 1) / 2.0;
                int iu = static_cast<int>(std::floor(u));
                double fu = u - iu;
                double val = 0.0;
                if (iu >= 0 && iu < nd) val += (1 - fu) * static_cast<double>(filtered.at2(v, iu));
                if (iu + 1 >= 0 && iu + 1 < nd)
                    val += fu * static_cast<double>(filtered.at2(v, iu + 1));
                img.at(h, w, 0) += static_cast<T>(wang * val);
            }
    }
    return img;
}

// ZF for MRI, FBP for CT.
template <typename T>
Tensor<T> linear_recon(const Tensor<T>& y, const ImagingOperator<T>& op) {
    if (op.modality() == Modality::MRI) return op.adjoint(y);
    return fbp(y, op);
}

// Data-consistency step u + A^t(y - A u) on plain tensors.
template <typename T>
Tensor<T> dc_step_raw(const Tensor<T>& u, const Tensor<T>& y, const ImagingOperator<T>& op) {
    if (u.dims() != op.image_shape()) throw ArgumentError("dc_step: image shape mismatch");
    if (y.dims() != op.meas_shape()) throw ArgumentError("dc_step: measurement shape mismatch");
    Tensor<T> r = op.forward(u);
    for (std::size_t i = 0; i < r.numel(); ++i) r[i] = y[i] - r[i];
    Tensor<T> corr = op.adjoint(r);
    Tensor<T> out = u;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += corr[i];
    return out;
}

}  // namespace ssr::phys
