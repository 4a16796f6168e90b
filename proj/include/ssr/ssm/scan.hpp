#pragma once

#include <memory>
#include <thread>
#include <vector>

#include "ssr/rng.hpp"
#include "ssr/tape.hpp"

namespace ssr::ssm {

using tg::Tensor;

// Dense-state linear recurrence shared across channels:
//   h[n] = A h[n-1] + B z[n],  zbar[n] = C h[n],  h[0] = 0.
// A is D x D, B is D x 1, C is 1 x D. Sequences are n x channels; channels
// are processed independently with the same parameters.

template <typename T>
void check_ssm_params(const Tensor<T>& A, const Tensor<T>& B, const Tensor<T>& C) {
    if (A.ndim() != 2 || A.dim(0) != A.dim(1)) throw ShapeError("ssm: A must be DxD");
    int D = A.dim(0);
    if (static_cast<int>(B.numel()) != D) throw ShapeError("ssm: B must have D entries");
    if (static_cast<int>(C.numel()) != D) throw ShapeError("ssm: C must have D entries");
}

namespace scan_detail {

template <typename T>
std::vector<T> transpose_mat(const T* A, int D) {
    std::vector<T> t(static_cast<std::size_t>(D) * D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) t[static_cast<std::size_t>(j) * D + i] = A[static_cast<std::size_t>(i) * D + j];
    return t;
}

// Scans one channel over contiguous samples zc[t0..t1) starting from state h
// (updated in place). At is A transposed (column-major rows), so the state
// update runs as contiguous FMAs. Appends the trajectory to `hsave` when
// non-null.
template <typename T>
void scan_span(const T* zc, T* outc, int t0, int t1, const T* At, const T* B, const T* C, int D,
               T* h, T* hsave) {
    std::vector<T> tmp(static_cast<std::size_t>(D));
    for (int t = t0; t < t1; ++t) {
        T zv = zc[t];
        for (int i = 0; i < D; ++i) tmp[static_cast<std::size_t>(i)] = B[i] * zv;
        for (int j = 0; j < D; ++j) {
            T v = h[j];
            const T* col = At + static_cast<std::size_t>(j) * D;
            T* pt = tmp.data();
            for (int i = 0; i < D; ++i) pt[i] += col[i] * v;
        }
        T y = T(0);
        for (int i = 0; i < D; ++i) {
            h[i] = tmp[static_cast<std::size_t>(i)];
            y += C[i] * h[i];
        }
        if (outc) outc[t] = y;
        if (hsave)
            for (int i = 0; i < D; ++i) hsave[static_cast<std::size_t>(t - t0) * D + i] = h[i];
    }
}

template <typename T>
std::vector<T> transpose_seq(const Tensor<T>& z) {
    int n = z.dim(0), ch = z.dim(1);
    std::vector<T> zt(z.numel());
    const T* p = z.data();
    for (int t = 0; t < n; ++t)
        for (int c = 0; c < ch; ++c)
            zt[static_cast<std::size_t>(c) * n + t] = p[static_cast<std::size_t>(t) * ch + c];
    return zt;
}

}  // namespace scan_detail

// Sequential reference scan. When `hsave` is non-null it receives the full
// state trajectory laid out as [channel][t][d] for backprop through time.
template <typename T>
Tensor<T> ssm_scan_seq(const Tensor<T>& z, const Tensor<T>& A, const Tensor<T>& B,
                       const Tensor<T>& C, std::vector<T>* hsave = nullptr) {
    check_ssm_params(A, B, C);
    if (z.ndim() != 2) throw ShapeError("ssm_scan: z must be n x channels");
    int n = z.dim(0), ch = z.dim(1), D = A.dim(0);
    if (hsave) hsave->assign(static_cast<std::size_t>(n) * ch * D, T(0));
    std::vector<T> zt = scan_detail::transpose_seq(z);
    std::vector<T> ot(zt.size());
    std::vector<T> at = scan_detail::transpose_mat(A.data(), D);
    std::vector<T> h(static_cast<std::size_t>(D));
    for (int c = 0; c < ch; ++c) {
        std::fill(h.begin(), h.end(), T(0));
        T* hs = hsave ? hsave->data() + static_cast<std::size_t>(c) * n * D : nullptr;
        scan_detail::scan_span(zt.data() + static_cast<std::size_t>(c) * n,
                               ot.data() + static_cast<std::size_t>(c) * n, 0, n, at.data(),
                               B.data(), C.data(), D, h.data(), hs);
    }
    Tensor<T> out({n, ch});
    T* po = out.data();
    for (int t = 0; t < n; ++t)
        for (int c = 0; c < ch; ++c)
            po[static_cast<std::size_t>(t) * ch + c] = ot[static_cast<std::size_t>(c) * n + t];
    return out;
}

// Work-efficient parallel scan. The recurrence step is the affine map
// h -> A h + B z[t]; maps compose associatively as
// (M2, b2) o (M1, b1) = (M2 M1, M2 b1 + b2), so a chunk of length L composes
// to (A^L, e) with e the chunk's end state from a zero start. Pass 1 computes
// chunk summaries in parallel, a short sequential pass combines carries, and
// pass 2 rescans chunks from their carried states. The chunk grid is a
// function of n only, so the reduction tree is fixed per run.
template <typename T>
Tensor<T> ssm_scan_par(const Tensor<T>& z, const Tensor<T>& A, const Tensor<T>& B,
                       const Tensor<T>& C, int lanes = 0) {
    check_ssm_params(A, B, C);
    if (z.ndim() != 2) throw ShapeError("ssm_scan: z must be n x channels");
    int n = z.dim(0), ch = z.dim(1), D = A.dim(0);
    int chunks = n >= 64 ? 8 : 1;
    int L = (n + chunks - 1) / chunks;
    chunks = (n + L - 1) / L;
    if (lanes <= 0) lanes = static_cast<int>(std::thread::hardware_concurrency());
    if (lanes < 1) lanes = 1;

    std::vector<T> zt = scan_detail::transpose_seq(z);
    std::vector<T> ot(zt.size());
    std::vector<T> at = scan_detail::transpose_mat(A.data(), D);

    Tensor<T> out({n, ch});
    auto emit = [&]() {
        T* po = out.data();
        for (int t = 0; t < n; ++t)
            for (int c = 0; c < ch; ++c)
                po[static_cast<std::size_t>(t) * ch + c] = ot[static_cast<std::size_t>(c) * n + t];
    };

    if (chunks == 1) {
        std::vector<T> h(static_cast<std::size_t>(D));
        for (int c = 0; c < ch; ++c) {
            std::fill(h.begin(), h.end(), T(0));
            scan_detail::scan_span(zt.data() + static_cast<std::size_t>(c) * n,
                                   ot.data() + static_cast<std::size_t>(c) * n, 0, n, at.data(),
                                   B.data(), C.data(), D, h.data(), static_cast<T*>(nullptr));
        }
        emit();
        return out;
    }

    // A^L for the carry recurrence across full-length chunks.
    std::vector<T> apow(static_cast<std::size_t>(D) * D, T(0));
    for (int i = 0; i < D; ++i) apow[static_cast<std::size_t>(i) * D + i] = T(1);
    std::vector<T> tmp(static_cast<std::size_t>(D) * D);
    for (int p = 0; p < L; ++p) {
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) {
                T acc = T(0);
                for (int k = 0; k < D; ++k)
                    acc += A.data()[static_cast<std::size_t>(i) * D + k] *
                           apow[static_cast<std::size_t>(k) * D + j];
                tmp[static_cast<std::size_t>(i) * D + j] = acc;
            }
        apow.swap(tmp);
    }

    auto run_tasks = [&](auto&& fn) {
        int total = ch * chunks;
        int workers = std::min(lanes, total);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w]() {
                for (int task = w; task < total; task += workers) fn(task / chunks, task % chunks);
            });
        for (auto& th : pool) th.join();
    };

    // Pass 1: per-(channel, chunk) end states from a zero start.
    std::vector<T> ends(static_cast<std::size_t>(ch) * chunks * D, T(0));
    run_tasks([&](int c, int j) {
        int t0 = j * L, t1 = std::min(n, t0 + L);
        std::vector<T> h(static_cast<std::size_t>(D), T(0));
        scan_detail::scan_span(zt.data() + static_cast<std::size_t>(c) * n, static_cast<T*>(nullptr),
                               t0, t1, at.data(), B.data(), C.data(), D, h.data(),
                               static_cast<T*>(nullptr));
        std::copy(h.begin(), h.end(), ends.begin() + (static_cast<std::size_t>(c) * chunks + j) * D);
    });

    // Carry combine: carry[j+1] = A^L carry[j] + e[j].
    std::vector<T> carries(static_cast<std::size_t>(ch) * chunks * D, T(0));
    for (int c = 0; c < ch; ++c) {
        const T* e = ends.data() + static_cast<std::size_t>(c) * chunks * D;
        T* cr = carries.data() + static_cast<std::size_t>(c) * chunks * D;
        for (int j = 1; j < chunks; ++j) {
            const T* prev = cr + static_cast<std::size_t>(j - 1) * D;
            T* cur = cr + static_cast<std::size_t>(j) * D;
            for (int i = 0; i < D; ++i) {
                T acc = e[static_cast<std::size_t>(j - 1) * D + i];
                const T* arow = apow.data() + static_cast<std::size_t>(i) * D;
                for (int k = 0; k < D; ++k) acc += arow[k] * prev[k];
                cur[i] = acc;
            }
        }
    }

    // Pass 2: rescan chunks from their carried states, emitting outputs.
    run_tasks([&](int c, int j) {
        int t0 = j * L, t1 = std::min(n, t0 + L);
        std::vector<T> h(carries.begin() + (static_cast<std::size_t>(c) * chunks + j) * D,
                         carries.begin() + (static_cast<std::size_t>(c) * chunks + j + 1) * D);
        scan_detail::scan_span(zt.data() + static_cast<std::size_t>(c) * n,
                               ot.data() + static_cast<std::size_t>(c) * n, t0, t1, at.data(),
                               B.data(), C.data(), D, h.data(), static_cast<T*>(nullptr));
    });
    emit();
    return out;
}

// ---------------------------------------------------------------------------
// tape op with backprop through time

template <typename T>
struct SsmScanNode : tg::OpNode<T> {
    const char* name() const override { return "ssm_scan"; }

    void backward(tg::Tape<T>& t) override {
        const Tensor<T>& go = t.grad_buf(this->out);
        const Tensor<T>& z = t.value(this->in[0]);
        const Tensor<T>& A = t.value(this->in[1]);
        const Tensor<T>& B = t.value(this->in[2]);
        const Tensor<T>& C = t.value(this->in[3]);
        int n = z.dim(0), ch = z.dim(1), D = A.dim(0);

        Tensor<T>* gz = t.needs_grad(this->in[0]) ? &t.grad_buf(this->in[0]) : nullptr;
        Tensor<T>* gA = t.needs_grad(this->in[1]) ? &t.grad_buf(this->in[1]) : nullptr;
        Tensor<T>* gB = t.needs_grad(this->in[2]) ? &t.grad_buf(this->in[2]) : nullptr;
        Tensor<T>* gC = t.needs_grad(this->in[3]) ? &t.grad_buf(this->in[3]) : nullptr;

        std::vector<T> zt = scan_detail::transpose_seq(z);
        std::vector<T> got = scan_detail::transpose_seq(go);
        std::vector<T> gzt(gz ? zt.size() : 0, T(0));

        std::vector<T> gh(static_cast<std::size_t>(D));
        std::vector<T> gh_next(static_cast<std::size_t>(D));
        const T* pa = A.data();
        for (int c = 0; c < ch; ++c) {
            const T* hs = hsave.data() + static_cast<std::size_t>(c) * n * D;
            const T* zc = zt.data() + static_cast<std::size_t>(c) * n;
            const T* gc = got.data() + static_cast<std::size_t>(c) * n;
            T* gzc = gz ? gzt.data() + static_cast<std::size_t>(c) * n : nullptr;
            std::fill(gh.begin(), gh.end(), T(0));
            for (int tt = n - 1; tt >= 0; --tt) {
                T gy = gc[tt];
                const T* ht = hs + static_cast<std::size_t>(tt) * D;
                // zbar = C h
                for (int d = 0; d < D; ++d) {
                    if (gC) (*gC)[static_cast<std::size_t>(d)] += gy * ht[d];
                    gh[static_cast<std::size_t>(d)] += C[static_cast<std::size_t>(d)] * gy;
                }
                // h[t] = A h[t-1] + B z[t]
                const T* hprev = tt > 0 ? hs + static_cast<std::size_t>(tt - 1) * D : nullptr;
                T zv = zc[tt];
                T gzv = T(0);
                for (int i = 0; i < D; ++i) {
                    T g = gh[static_cast<std::size_t>(i)];
                    if (gA && hprev) {
                        T* garow = gA->data() + static_cast<std::size_t>(i) * D;
                        for (int j = 0; j < D; ++j) garow[j] += g * hprev[j];
                    }
                    if (gB) (*gB)[static_cast<std::size_t>(i)] += g * zv;
                    gzv += B[static_cast<std::size_t>(i)] * g;
                }
                if (gzc) gzc[tt] = gzv;
                // gh_prev = A^T gh
                std::fill(gh_next.begin(), gh_next.end(), T(0));
                for (int i = 0; i < D; ++i) {
                    T v = gh[static_cast<std::size_t>(i)];
                    const T* arow = pa + static_cast<std::size_t>(i) * D;
                    T* pn = gh_next.data();
                    for (int j = 0; j < D; ++j) pn[j] += arow[j] * v;
                }
                gh.swap(gh_next);
            }
        }
        if (gz) {
            T* pgz = gz->data();
            for (int t = 0; t < n; ++t)
                for (int c = 0; c < ch; ++c)
                    pgz[static_cast<std::size_t>(t) * ch + c] +=
                        gzt[static_cast<std::size_t>(c) * n + t];
        }
    }

    std::vector<T> hsave;  // [channel][t][d] state trajectory from the forward pass
};

template <typename T>
tg::Val<T> ssm_scan(tg::Val<T> z, tg::Val<T> A, tg::Val<T> B, tg::Val<T> C) {
    tg::Tape<T>& tape = *z.tape;
    auto node = std::make_unique<SsmScanNode<T>>();
    std::vector<T>* hs = tape.grad_enabled() ? &node->hsave : nullptr;
    Tensor<T> out = ssm_scan_seq(z.value(), A.value(), B.value(), C.value(), hs);
    tg::Val<T> o = tape.result(std::move(out), {z.id, A.id, B.id, C.id});
    node->in = {z.id, A.id, B.id, C.id};
    node->out = o.id;
    tape.record(std::move(node));
    return o;
}

// Fresh stable parameters: diagonal A with entries in [0.5, 0.99) keeps the
// recurrence contractive over long sequences; B and C are Gaussian with
// 1/sqrt(D) spread.
template <typename T>
void init_ssm_params(Tensor<T>& A, Tensor<T>& B, Tensor<T>& C, int D, Rng& rng) {
    A = Tensor<T>::zeros({D, D});
    B = Tensor<T>::zeros({D, 1});
    C = Tensor<T>::zeros({1, D});
    for (int i = 0; i < D; ++i)
        A[static_cast<std::size_t>(i) * D + i] = static_cast<T>(rng.uniform(0.5, 0.99));
    double s = 1.0 / std::sqrt(static_cast<double>(D));
    for (int i = 0; i < D; ++i) B[static_cast<std::size_t>(i)] = static_cast<T>(rng.normal(0.0, s));
    for (int i = 0; i < D; ++i) C[static_cast<std::size_t>(i)] = static_cast<T>(rng.normal(0.0, s));
}

}  // namespace ssr::ssm
