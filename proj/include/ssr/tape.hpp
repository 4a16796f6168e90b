#pragma once

#include <memory>
#include <vector>

#include "ssr/tensor.hpp"

namespace ssr::tg {

template <typename T>
class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid for the tape's
// lifetime.
template <typename T>
struct Val {
    Tape<T>* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor<T>& value() const { return tape->value(id); }
    const Shape& dims() const { return value().dims(); }
};

// One recorded primitive application. Subclasses implement the pullback:
// read the output slot's gradient, accumulate into the input slots'
// gradients. Saved activations beyond the input values themselves live in the
// subclass.
template <typename T>
class OpNode {
  public:
    virtual ~OpNode() = default;
    virtual const char* name() const = 0;
    virtual void backward(Tape<T>& tape) = 0;

    std::vector<int> in;
    int out = -1;
};

// Fixed-graph reverse-mode tape. Values are stored in creation order, which
// is a topological order by construction; backward replays the op list once
// in reverse.
template <typename T>
class Tape {
  public:
    using value_type = T;

    Val<T> leaf(Tensor<T> v, bool requires_grad) {
        slots_.push_back(Slot{std::move(v), Tensor<T>{}, requires_grad, requires_grad});
        return Val<T>{this, static_cast<int>(slots_.size()) - 1};
    }

    Val<T> constant(Tensor<T> v) { return leaf(std::move(v), false); }

    // Allocates the output slot for an op about to be recorded.
    Val<T> result(Tensor<T> v, const std::vector<int>& inputs) {
        bool needs = false;
        for (int i : inputs) needs = needs || slots_[static_cast<std::size_t>(i)].needs_grad;
        slots_.push_back(Slot{std::move(v), Tensor<T>{}, false, needs});
        return Val<T>{this, static_cast<int>(slots_.size()) - 1};
    }

    void record(std::unique_ptr<OpNode<T>> op) {
        if (grad_enabled_ && slots_[static_cast<std::size_t>(op->out)].needs_grad)
            ops_.push_back(std::move(op));
    }

    const Tensor<T>& value(int id) const { return slots_[static_cast<std::size_t>(id)].value; }
    Tensor<T>& mutable_value(int id) { return slots_[static_cast<std::size_t>(id)].value; }

    bool needs_grad(int id) const { return slots_[static_cast<std::size_t>(id)].needs_grad; }

    // Gradient accumulation buffer, zero-allocated on first touch.
    Tensor<T>& grad_buf(int id) {
        Slot& s = slots_[static_cast<std::size_t>(id)];
        if (s.grad.empty()) s.grad = Tensor<T>::zeros(s.value.dims());
        return s.grad;
    }

    bool has_grad(int id) const { return !slots_[static_cast<std::size_t>(id)].grad.empty(); }

    const Tensor<T>& grad(const Val<T>& v) const {
        const Slot& s = slots_[static_cast<std::size_t>(v.id)];
        if (s.grad.empty()) throw StateError("no gradient recorded for this value");
        return s.grad;
    }

    Tensor<T> grad_or_zero(const Val<T>& v) const {
        const Slot& s = slots_[static_cast<std::size_t>(v.id)];
        return s.grad.empty() ? Tensor<T>::zeros(s.value.dims()) : s.grad;
    }

    void backward(const Val<T>& loss) {
        if (loss.value().numel() != 1)
            throw ArgumentError("backward requires a scalar loss, got shape " +
                                shape_str(loss.value().dims()));
        backward_seeded(loss, Tensor<T>::scalar(T(1)));
    }

    // Reverse sweep with an explicit upstream gradient on `out`. Used by the
    // effective-receptive-field probe, which seeds a single output pixel.
    void backward_seeded(const Val<T>& out, const Tensor<T>& seed) {
        if (!grad_enabled_) throw StateError("backward on a tape recorded with gradients disabled");
        if (backward_done_) throw StateError("backward called twice on the same tape");
        check_same_shape(out.value(), seed, "backward seed");
        backward_done_ = true;
        grad_buf(out.id) = seed;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
            OpNode<T>* op = it->get();
            if (has_grad(op->out)) op->backward(*this);
        }
    }

    void set_grad_enabled(bool on) { grad_enabled_ = on; }
    bool grad_enabled() const { return grad_enabled_; }

    std::size_t num_values() const { return slots_.size(); }
    std::size_t num_ops() const { return ops_.size(); }

  private:
    struct Slot {
        Tensor<T> value;
        Tensor<T> grad;
        bool requires_grad = false;
        bool needs_grad = false;
    };

    std::vector<Slot> slots_;
    std::vector<std::unique_ptr<OpNode<T>>> ops_;
    bool grad_enabled_ = true;
    bool backward_done_ = false;
};

}  // namespace ssr::tg
