#pragma once

#include <memory>

#include "ssr/ops.hpp"

namespace ssr::ssm {

using tg::Shape;
using tg::Tensor;

enum class ScanOrder { Raster, Serpentine };

inline ScanOrder scan_order_from_name(const std::string& s) {
    if (s == "raster") return ScanOrder::Raster;
    if (s == "serpentine") return ScanOrder::Serpentine;
    throw ArgumentError("unknown scan order: " + s);
}

inline std::string scan_order_name(ScanOrder o) {
    return o == ScanOrder::Raster ? "raster" : "serpentine";
}

// Grid-to-sequence addressing for the sweep scan. The flattened sequence
// index of grid cell (r, c) under raster order is r*cols + c; serpentine
// reverses every odd row.
struct ScanLayout {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    ScanOrder order = ScanOrder::Raster;

    int seq_len() const { return rows * cols; }

    int seq_index(int r, int c) const {
        if (order == ScanOrder::Serpentine && (r & 1)) return r * cols + (cols - 1 - c);
        return r * cols + c;
    }
};

// ---------------------------------------------------------------------------
// space-to-depth / depth-to-space: tile J x J pixel patches along channels.
// Channel packing is c_tilde = c*J^2 + v1*J + v2 (0-based), i.e. source
// channel major, patch row, patch column.

template <typename T>
Tensor<T> space_to_depth_raw(const Tensor<T>& d, int J) {
    if (d.ndim() != 3) throw ShapeError("space_to_depth expects HxWxC input");
    int H = d.dim(0), W = d.dim(1), C = d.dim(2);
    if (J < 1 || H % J != 0 || W % J != 0)
        throw ArgumentError("space_to_depth: J must divide both spatial extents");
    Tensor<T> out({H / J, W / J, C * J * J});
    for (int w1 = 0; w1 < H / J; ++w1)
        for (int w2 = 0; w2 < W / J; ++w2) {
            T* po = &out.at(w1, w2, 0);
            for (int c = 0; c < C; ++c)
                for (int v1 = 0; v1 < J; ++v1)
                    for (int v2 = 0; v2 < J; ++v2)
                        po[(c * J + v1) * J + v2] = d.at(w1 * J + v1, w2 * J + v2, c);
        }
    return out;
}

template <typename T>
Tensor<T> depth_to_space_raw(const Tensor<T>& g, int J) {
    if (g.ndim() != 3) throw ShapeError("depth_to_space expects HxWxC input");
    int Hj = g.dim(0), Wj = g.dim(1), Cj = g.dim(2);
    if (J < 1 || Cj % (J * J) != 0)
        throw ArgumentError("depth_to_space: channel count must be divisible by J^2");
    int C = Cj / (J * J);
    Tensor<T> out({Hj * J, Wj * J, C});
    for (int w1 = 0; w1 < Hj; ++w1)
        for (int w2 = 0; w2 < Wj; ++w2) {
            const T* pi = &g.at(w1, w2, 0);
            for (int c = 0; c < C; ++c)
                for (int v1 = 0; v1 < J; ++v1)
                    for (int v2 = 0; v2 < J; ++v2)
                        out.at(w1 * J + v1, w2 * J + v2, c) = pi[(c * J + v1) * J + v2];
        }
    return out;
}

// ---------------------------------------------------------------------------
// sweep flatten / unflatten between a rows x cols x C grid and an n x C
// sequence.

template <typename T>
Tensor<T> sweep_flatten_raw(const Tensor<T>& grid, const ScanLayout& layout) {
    if (grid.ndim() != 3 || grid.dim(0) != layout.rows || grid.dim(1) != layout.cols ||
        grid.dim(2) != layout.channels)
        throw ShapeError("sweep_flatten: grid does not match layout");
    Tensor<T> seq({layout.seq_len(), layout.channels});
    for (int r = 0; r < layout.rows; ++r)
        for (int c = 0; c < layout.cols; ++c) {
            const T* src = &grid.at(r, c, 0);
            T* dst = &seq.at2(layout.seq_index(r, c), 0);
            for (int ch = 0; ch < layout.channels; ++ch) dst[ch] = src[ch];
        }
    return seq;
}

template <typename T>
Tensor<T> sweep_unflatten_raw(const Tensor<T>& seq, const ScanLayout& layout) {
    if (seq.ndim() != 2 || seq.dim(0) != layout.seq_len() || seq.dim(1) != layout.channels)
        throw ShapeError("sweep_unflatten: sequence does not match layout");
    Tensor<T> grid({layout.rows, layout.cols, layout.channels});
    for (int r = 0; r < layout.rows; ++r)
        for (int c = 0; c < layout.cols; ++c) {
            const T* src = &seq.at2(layout.seq_index(r, c), 0);
            T* dst = &grid.at(r, c, 0);
            for (int ch = 0; ch < layout.channels; ++ch) dst[ch] = src[ch];
        }
    return grid;
}

// ---------------------------------------------------------------------------
// tape ops: all four maps are pure permutations, so each pullback is the
// inverse permutation applied to the upstream gradient.

template <typename T>
struct SpaceToDepthNode : tg::OpNode<T> {
    explicit SpaceToDepthNode(int J) : J_(J) {}
    const char* name() const override { return "space_to_depth"; }
    void backward(tg::Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        tg::detail::accumulate(t.grad_buf(this->in[0]), depth_to_space_raw(t.grad_buf(this->out), J_));
    }
    int J_;
};

template <typename T>
tg::Val<T> space_to_depth(tg::Val<T> d, int J) {
    return tg::detail::record_unary<T, SpaceToDepthNode<T>>(d, space_to_depth_raw(d.value(), J), J);
}

template <typename T>
struct DepthToSpaceNode : tg::OpNode<T> {
    explicit DepthToSpaceNode(int J) : J_(J) {}
    const char* name() const override { return "depth_to_space"; }
    void backward(tg::Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        tg::detail::accumulate(t.grad_buf(this->in[0]), space_to_depth_raw(t.grad_buf(this->out), J_));
    }
    int J_;
};

template <typename T>
tg::Val<T> depth_to_space(tg::Val<T> g, int J) {
    return tg::detail::record_unary<T, DepthToSpaceNode<T>>(g, depth_to_space_raw(g.value(), J), J);
}

template <typename T>
struct SweepFlattenNode : tg::OpNode<T> {
    explicit SweepFlattenNode(ScanLayout l) : layout_(l) {}
    const char* name() const override { return "sweep_flatten"; }
    void backward(tg::Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        tg::detail::accumulate(t.grad_buf(this->in[0]),
                               sweep_unflatten_raw(t.grad_buf(this->out), layout_));
    }
    ScanLayout layout_;
};

template <typename T>
tg::Val<T> sweep_flatten(tg::Val<T> grid, const ScanLayout& layout) {
    return tg::detail::record_unary<T, SweepFlattenNode<T>>(
        grid, sweep_flatten_raw(grid.value(), layout), layout);
}

template <typename T>
struct SweepUnflattenNode : tg::OpNode<T> {
    explicit SweepUnflattenNode(ScanLayout l) : layout_(l) {}
    const char* name() const override { return "sweep_unflatten"; }
    void backward(tg::Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        tg::detail::accumulate(t.grad_buf(this->in[0]),
                               sweep_flatten_raw(t.grad_buf(this->out), layout_));
    }
    ScanLayout layout_;
};

template <typename T>
tg::Val<T> sweep_unflatten(tg::Val<T> seq, const ScanLayout& layout) {
    return tg::detail::record_unary<T, SweepUnflattenNode<T>>(
        seq, sweep_unflatten_raw(seq.value(), layout), layout);
}

}  // namespace ssr::ssm
