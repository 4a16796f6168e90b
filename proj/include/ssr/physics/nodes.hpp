#pragma once

#include <memory>

#include "ssr/ops.hpp"
#include "ssr/physics/operator.hpp"

namespace ssr::phys {

// Differentiable wrappers. The operators are linear, so each pullback is the
// partner map applied to the upstream gradient. Nodes hold a non-owning
// pointer; the operator must outlive the tape.

template <typename T>
struct OpForwardNode : tg::OpNode<T> {
    explicit OpForwardNode(const ImagingOperator<T>* op) : op_(op) {}
    const char* name() const override { return "imaging_forward"; }
    void backward(tg::Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        tg::detail::accumulate(t.grad_buf(this->in[0]), op_->adjoint(t.grad_buf(this->out)));
    }
    const ImagingOperator<T>* op_;
};

template <typename T>
tg::Val<T> op_forward(tg::Val<T> x, const ImagingOperator<T>& op) {
    return tg::detail::record_unary<T, OpForwardNode<T>>(x, op.forward(x.value()), &op);
}

template <typename T>
struct OpAdjointNode : tg::OpNode<T> {
    explicit OpAdjointNode(const ImagingOperator<T>* op) : op_(op) {}
    const char* name() const override { return "imaging_adjoint"; }
    void backward(tg::Tape<T>& t) override {
        if (!t.needs_grad(this->in[0])) return;
        tg::detail::accumulate(t.grad_buf(this->in[0]), op_->forward(t.grad_buf(this->out)));
    }
    const ImagingOperator<T>* op_;
};

template <typename T>
tg::Val<T> op_adjoint(tg::Val<T> y, const ImagingOperator<T>& op) {
    return tg::detail::record_unary<T, OpAdjointNode<T>>(y, op.adjoint(y.value()), &op);
}

// u + A^t(y - A u): affine in u, with pullback (I - A^t A) by composition.
template <typename T>
tg::Val<T> dc_step(tg::Val<T> u, tg::Val<T> y, const ImagingOperator<T>& op) {
    if (u.value().dims() != op.image_shape())
        throw ArgumentError("dc_step: image shape does not match operator");
    if (y.value().dims() != op.meas_shape())
        throw ArgumentError("dc_step: measurement shape does not match operator");
    auto residual = tg::sub(y, op_forward(u, op));
    return tg::add(u, op_adjoint(residual, op));
}

}  // namespace ssr::phys
