#pragma once

#include <cmath>
#include <memory>

#include "ssr/tape.hpp"

namespace ssr::tg {

namespace detail {

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
    T* d = dst.data();
    const T* s = src.data();
    for (std::size_t i = 0; i < dst.numel(); ++i) d[i] += s[i];
}

template <typename T, typename Node, typename... Args>
Val<T> record_unary(Val<T> x, Tensor<T> out_value, Args&&... args) {
    Tape<T>& tape = *x.tape;
    Val<T> out = tape.result(std::move(out_value), {x.id});
    auto node = std::make_unique<Node>(std::forward<Args>(args)...);
    node->in = {x.id};
    node->out = out.id;
    tape.record(std::move(node));
    return out;
}

template <typename T, typename Node>
Val<T> record_binary(Val<T> a, Val<T> b, Tensor<T> out_value) {
    Tape<T>& tape = *a.tape;
    if (a.tape != b.tape) throw StateError("operands recorded on different tapes");
    Val<T> out = tape.result(std::move(out_value), {a.id, b.id});
    auto node = std::make_unique<Node>();
    node->in = {a.id, b.id};
    node->out = out.id;
    tape.record(std::move(node));
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// add / sub / mul / scale

template <typename T>
struct AddNode : OpNode<T> {
    const char* name() const override { return "add"; }
    void backward(Tape<T>& t) override {
        const Tensor<T>& go = t.grad_buf(this->out);
        if (t.needs_grad(this->in[0])) detail::accumulate(t.grad_buf(this->in[0]), go);
        if (t.needs_grad(this->in[1])) detail::accumulate(t.grad_buf(this->in[1]), go);
    }
};

template <typename T>
Val<T> add(Val<T> a, Val<T> b) {
    check_same_shape(a.value(), b.value(), "add");
    Tensor<T> out = a.value();
    const T* pb = b.value().data();
    T* po = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
    return detail::record_binary<T, AddNode<T>>(a, b, std::move(out));
}

template <typename T>
struct SubNode : OpNode<T> {
    const char* name() const override { return "sub"; }
    void backward(Tape<T>& t) override {
        const Tensor<T>& go = t.grad_buf(this->out);
        if (t.needs_grad(this->in[0])) detail::accumulate(t.grad_buf(this->in[0]), go);
        if (t.needs_grad(this->in[1])) {
            Tensor<T>& gb = t.grad_buf(this->in[1]);
            const T* g = go.data();
            T* d = gb.data();
            for (std::size_t i = 0; i < gb.numel(); ++i) d[i] -= g[i];
        }
    }
};

template <typename T>
Val<T> sub(Val<T> a, Val<T> b) {
    check_same_shape(a.value(), b.value(), "sub");
    Tensor<T> out = a.value();
    const T* pb = b.value().data();
    T* po = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) po[i] -= pb[i];
    return detail::record_binary<T, SubNode<T>>(a, b, std::move(out));
}

template <typename T>
struct MulNode : OpNode<T> {
    const char* name() const override { return "mul"; }
    void backward(Tape<T>& t) override {
        const Tensor<T>& go = t.grad_buf(this->out);
        const T* g = go.data();
        if (t.needs_grad(this->in[0])) {
            Tensor<T>& ga = t.grad_buf(this->in[0]);
            const T* pb = t.value(this->in[1]).data();
            T* d = ga.data();
            for (std::size_t i = 0; i < ga.numel(); ++i) d[i] += g[i] * pb[i];
        }
        if (t.needs_grad(this->in[1])) {
            Tensor<T>& gb = t.grad_buf(this->in[1]);
            const T* pa = t.value(this->in[0]).data();
            T* d = gb.data();
            for (std::size_t i = 0; i < gb.numel(); ++i) d[i] += g[i] * pa[i];
        }
    }
};

template <typename T>
Val<T> mul(Val<T> a, Val<T> b) {
    check_same_shape(a.value(), b.value(), "mul");
    Tensor<T> out = a.value();
    const T* pb = b.value().data();
    T* po = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) po[i] *= pb[i];
    return detail::record_binary<T, MulNode<T>>(a, b, std::move(out));
}

template <typename T>
struct ScaleNode : OpNode<T> {
    explicit ScaleNode(T c) : c_(c) {}
    const char* name() const override { return "scale"; }
    void backward(Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        const Tensor<T>& go = t.grad_buf(this->out);
        Tensor<T>& g = t.grad_buf(this->in[0]);
        const T* s = go.data();
        T* d = g.data();
        for (std::size_t i = 0; i < g.numel(); ++i) d[i] += c_ * s[i];
    }
    T c_;
};

template <typename T>
Val<T> scale(Val<T> x, T c) {
    Tensor<T> out = x.value();
    T* po = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) po[i] *= c;
    return detail::record_unary<T, ScaleNode<T>>(x, std::move(out), c);
}

// ---------------------------------------------------------------------------
// silu: x * sigmoid(x)

template <typename T>
struct SiluNode : OpNode<T> {
    const char* name() const override { return "silu"; }
    void backward(Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        const Tensor<T>& go = t.grad_buf(this->out);
        const Tensor<T>& x = t.value(this->in[0]);
        Tensor<T>& g = t.grad_buf(this->in[0]);
        const T* px = x.data();
        const T* pg = go.data();
        T* d = g.data();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            T s = T(1) / (T(1) + std::exp(-px[i]));
            d[i] += pg[i] * s * (T(1) + px[i] * (T(1) - s));
        }
    }
};

template <typename T>
Val<T> silu(Val<T> x) {
    Tensor<T> out = x.value();
    T* po = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) {
        T s = T(1) / (T(1) + std::exp(-po[i]));
        po[i] *= s;
    }
    return detail::record_unary<T, SiluNode<T>>(x, std::move(out));
}

// ---------------------------------------------------------------------------
// reductions

template <typename T>
struct SumNode : OpNode<T> {
    const char* name() const override { return "sum"; }
    void backward(Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        T go = t.grad_buf(this->out)[0];
        Tensor<T>& g = t.grad_buf(this->in[0]);
        T* d = g.data();
        for (std::size_t i = 0; i < g.numel(); ++i) d[i] += go;
    }
};

template <typename T>
Val<T> sum(Val<T> x) {
    T acc = T(0);
    const T* p = x.value().data();
    for (std::size_t i = 0; i < x.value().numel(); ++i) acc += p[i];
    return detail::record_unary<T, SumNode<T>>(x, Tensor<T>::scalar(acc));
}

// Mean absolute difference. Gradient at exact ties is taken as zero.
template <typename T>
struct L1LossNode : OpNode<T> {
    const char* name() const override { return "l1_loss"; }
    void backward(Tape<T>& t) override {
        T go = t.grad_buf(this->out)[0];
        const Tensor<T>& p = t.value(this->in[0]);
        const Tensor<T>& q = t.value(this->in[1]);
        T inv_n = T(1) / static_cast<T>(p.numel());
        const T* pp = p.data();
        const T* pq = q.data();
        if (t.needs_grad(this->in[0])) {
            T* d = t.grad_buf(this->in[0]).data();
            for (std::size_t i = 0; i < p.numel(); ++i) {
                T diff = pp[i] - pq[i];
                T s = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
                d[i] += go * s * inv_n;
            }
        }
        if (t.needs_grad(this->in[1])) {
            T* d = t.grad_buf(this->in[1]).data();
            for (std::size_t i = 0; i < p.numel(); ++i) {
                T diff = pp[i] - pq[i];
                T s = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
                d[i] -= go * s * inv_n;
            }
        }
    }
};

template <typename T>
Val<T> l1_loss(Val<T> pred, Val<T> target) {
    check_same_shape(pred.value(), target.value(), "l1_loss");
    const T* pp = pred.value().data();
    const T* pt = target.value().data();
    T acc = T(0);
    std::size_t n = pred.value().numel();
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(pp[i] - pt[i]);
    acc /= static_cast<T>(n);
    return detail::record_binary<T, L1LossNode<T>>(pred, target, Tensor<T>::scalar(acc));
}

// ---------------------------------------------------------------------------
// channel concatenation (H x W x C layout)

template <typename T>
struct ConcatChNode : OpNode<T> {
    const char* name() const override { return "concat_ch"; }
    void backward(Tape<T>& t) override {
        const Tensor<T>& go = t.grad_buf(this->out);
        int H = go.dim(0), W = go.dim(1), Cout = go.dim(2);
        int c0 = 0;
        for (int ii = 0; ii < static_cast<int>(this->in.size()); ++ii) {
            int id = this->in[static_cast<std::size_t>(ii)];
            int ci = t.value(id).dim(2);
            if (t.needs_grad(id)) {
                Tensor<T>& g = t.grad_buf(id);
                for (int h = 0; h < H; ++h)
                    for (int w = 0; w < W; ++w) {
                        const T* src = &go.at(h, w, c0);
                        T* dst = &g.at(h, w, 0);
                        for (int c = 0; c < ci; ++c) dst[c] += src[c];
                    }
            }
            c0 += ci;
        }
        (void)Cout;
    }
};

template <typename T>
Val<T> concat_ch(const std::vector<Val<T>>& parts) {
    if (parts.empty()) throw ArgumentError("concat_ch requires at least one input");
    Tape<T>& tape = *parts[0].tape;
    int H = parts[0].value().dim(0), W = parts[0].value().dim(1);
    int Cout = 0;
    std::vector<int> ids;
    for (const auto& p : parts) {
        if (p.value().ndim() != 3 || p.value().dim(0) != H || p.value().dim(1) != W)
            throw ShapeError("concat_ch: inputs must share HxW extents");
        Cout += p.value().dim(2);
        ids.push_back(p.id);
    }
    Tensor<T> out({H, W, Cout});
    int c0 = 0;
    for (const auto& p : parts) {
        int ci = p.value().dim(2);
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                const T* src = &p.value().at(h, w, 0);
                T* dst = &out.at(h, w, c0);
                for (int c = 0; c < ci; ++c) dst[c] = src[c];
            }
        c0 += ci;
    }
    Val<T> o = tape.result(std::move(out), ids);
    auto node = std::make_unique<ConcatChNode<T>>();
    node->in = ids;
    node->out = o.id;
    tape.record(std::move(node));
    return o;
}

// ---------------------------------------------------------------------------
// average pooling by an integer factor (used by the multi-scale loss variant)

template <typename T>
struct AvgPoolNode : OpNode<T> {
    explicit AvgPoolNode(int f) : f_(f) {}
    const char* name() const override { return "avg_pool2d"; }
    void backward(Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        const Tensor<T>& go = t.grad_buf(this->out);
        Tensor<T>& g = t.grad_buf(this->in[0]);
        int Ho = go.dim(0), Wo = go.dim(1), C = go.dim(2);
        T inv = T(1) / static_cast<T>(f_ * f_);
        for (int h = 0; h < Ho; ++h)
            for (int w = 0; w < Wo; ++w)
                for (int c = 0; c < C; ++c) {
                    T v = go.at(h, w, c) * inv;
                    for (int dy = 0; dy < f_; ++dy)
                        for (int dx = 0; dx < f_; ++dx) g.at(h * f_ + dy, w * f_ + dx, c) += v;
                }
    }
    int f_;
};

template <typename T>
Val<T> avg_pool2d(Val<T> x, int factor) {
    if (factor < 1) throw ArgumentError("avg_pool2d: factor must be >= 1");
    const Tensor<T>& v = x.value();
    if (v.ndim() != 3) throw ShapeError("avg_pool2d expects HxWxC input");
    int H = v.dim(0), W = v.dim(1), C = v.dim(2);
    if (H % factor != 0 || W % factor != 0)
        throw ShapeError("avg_pool2d: extents not divisible by factor");
    int Ho = H / factor, Wo = W / factor;
    Tensor<T> out({Ho, Wo, C});
    T inv = T(1) / static_cast<T>(factor * factor);
    for (int h = 0; h < Ho; ++h)
        for (int w = 0; w < Wo; ++w)
            for (int c = 0; c < C; ++c) {
                T acc = T(0);
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        acc += v.at(h * factor + dy, w * factor + dx, c);
                out.at(h, w, c) = acc * inv;
            }
    return detail::record_unary<T, AvgPoolNode<T>>(x, std::move(out), factor);
}

}  // namespace ssr::tg
