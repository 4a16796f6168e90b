#pragma once

#include <cmath>
#include <map>
#include <string>

#include "ssr/tensor.hpp"

namespace ssr::tg {

// Bias-corrected Adam with per-key moment buffers. The key set is fixed on
// first step; step counter t advances once per adam_step call.
template <typename T>
struct AdamState {
    T lr;
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
    long t = 0;
    std::map<std::string, Tensor<T>> m;
    std::map<std::string, Tensor<T>> v;

    explicit AdamState(T learning_rate) : lr(learning_rate) {}
};

template <typename T>
void adam_step(std::map<std::string, Tensor<T>>& params,
               const std::map<std::string, Tensor<T>>& grads, AdamState<T>& state) {
    state.t += 1;
    T bc1 = T(1) - std::pow(state.beta1, static_cast<T>(state.t));
    T bc2 = T(1) - std::pow(state.beta2, static_cast<T>(state.t));
    for (auto& [key, p] : params) {
        auto git = grads.find(key);
        if (git == grads.end()) throw ShapeError("adam_step: missing gradient for key " + key);
        const Tensor<T>& g = git->second;
        if (!p.same_shape(g)) throw ShapeError("adam_step: gradient shape mismatch for " + key);
        Tensor<T>& m = state.m.try_emplace(key, Tensor<T>::zeros(p.dims())).first->second;
        Tensor<T>& v = state.v.try_emplace(key, Tensor<T>::zeros(p.dims())).first->second;
        if (!m.same_shape(p)) throw ShapeError("adam_step: moment shape mismatch for " + key);
        T* pp = p.data();
        T* pm = m.data();
        T* pv = v.data();
        const T* pg = g.data();
        for (std::size_t i = 0; i < p.numel(); ++i) {
            pm[i] = state.beta1 * pm[i] + (T(1) - state.beta1) * pg[i];
            pv[i] = state.beta2 * pv[i] + (T(1) - state.beta2) * pg[i] * pg[i];
            T mhat = pm[i] / bc1;
            T vhat = pv[i] / bc2;
            pp[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace ssr::tg
