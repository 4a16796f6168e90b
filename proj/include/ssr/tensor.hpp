#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <vector>

#include "ssr/common.hpp"

namespace ssr::tg {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& dims) {
    std::size_t n = 1;
    for (int d : dims) {
        if (d <= 0) throw ShapeError("tensor extents must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

inline std::string shape_str(const Shape& dims) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
    os << "]";
    return os.str();
}

// Dense row-major multi-dimensional array. Pure data; gradient state lives on
// the tape slot that owns a tensor during differentiation.
template <typename T>
class Tensor {
  public:
    Tensor() = default;

    explicit Tensor(Shape dims) : dims_(std::move(dims)), data_(shape_numel(dims_), T(0)) {}

    Tensor(Shape dims, std::vector<T> data) : dims_(std::move(dims)), data_(std::move(data)) {
        if (data_.size() != shape_numel(dims_))
            throw ShapeError("data length does not match shape " + shape_str(dims_));
    }

    static Tensor zeros(Shape dims) { return Tensor(std::move(dims)); }

    static Tensor full(Shape dims, T v) {
        Tensor t(std::move(dims));
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    static Tensor scalar(T v) { return Tensor({1}, {v}); }

    const Shape& dims() const { return dims_; }
    int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(dims_.size()); }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // 3-D (H, W, C) convenience accessors; images use this layout throughout.
    T& at(int h, int w, int c) {
        return data_[(static_cast<std::size_t>(h) * dims_[1] + w) * dims_[2] + c];
    }
    const T& at(int h, int w, int c) const {
        return data_[(static_cast<std::size_t>(h) * dims_[1] + w) * dims_[2] + c];
    }

    T& at2(int i, int j) { return data_[static_cast<std::size_t>(i) * dims_[1] + j]; }
    const T& at2(int i, int j) const { return data_[static_cast<std::size_t>(i) * dims_[1] + j]; }

    bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    T item() const {
        if (numel() != 1) throw ShapeError("item() requires a scalar tensor");
        return data_[0];
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> d(data_.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<U>(data_[i]);
        return Tensor<U>(dims_, std::move(d));
    }

    DType dtype() const { return dtype_of<T>::value; }

  private:
    Shape dims_;
    std::vector<T> data_;
};

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.dims()) + " vs " +
                         shape_str(b.dims()));
}

}  // namespace ssr::tg
