#pragma once

#include "ssr/model/network.hpp"
#include "ssr/physics/sample.hpp"

namespace ssr::model {

// Channel reduction + peak normalization of an input-gradient image:
// per-pixel L2 norm over channels, scaled so the maximum is 1.
template <typename T>
Tensor<T> erf_reduce_normalize(const Tensor<T>& grad) {
    int H = grad.dim(0), W = grad.dim(1), C = grad.dim(2);
    Tensor<T> map({H, W});
    double peak = 0.0;
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double s = 0.0;
            for (int c = 0; c < C; ++c)
                s += static_cast<double>(grad.at(h, w, c)) * grad.at(h, w, c);
            double m = std::sqrt(s);
            map.at2(h, w) = static_cast<T>(m);
            peak = std::max(peak, m);
        }
    if (peak <= 0.0)
        throw phys::DegenerateError("erf: gradient vanished everywhere, map cannot be normalized");
    T inv = static_cast<T>(1.0 / peak);
    for (std::size_t i = 0; i < map.numel(); ++i) map[i] *= inv;
    return map;
}

// Backpropagates the output magnitude at the center pixel to `input` and
// reduces the gradient to a normalized H x W map. The upstream seed is the
// derivative of sqrt(sum_c out_c^2) at the center pixel (uniform across
// channels when the output is zero there, which only rescales the map).
template <typename T>
Tensor<T> erf_from_output(tg::Tape<T>& tape, tg::Val<T> output, tg::Val<T> input) {
    const Tensor<T>& out = output.value();
    int H = out.dim(0), W = out.dim(1), C = out.dim(2);
    int ch = H / 2, cw = W / 2;
    double mag = 0.0;
    for (int c = 0; c < C; ++c) mag += static_cast<double>(out.at(ch, cw, c)) * out.at(ch, cw, c);
    mag = std::sqrt(mag);
    Tensor<T> seed(out.dims());
    for (int c = 0; c < C; ++c)
        seed.at(ch, cw, c) = mag > 0 ? static_cast<T>(out.at(ch, cw, c) / mag)
                                     : static_cast<T>(1.0 / std::sqrt(static_cast<double>(C)));
    tape.backward_seeded(output, seed);
    return erf_reduce_normalize(tape.grad_or_zero(input));
}

// Effective receptive field of the network at a sample: |d(center magnitude)
// / d x0|, channel-reduced and normalized to peak 1.
template <typename T>
Tensor<T> erf_map(const ModelWeights<T>& weights, const ModelConfig& cfg,
                  const phys::ReconSample<T>& sample) {
    tg::Tape<T> tape;
    auto x0 = tape.leaf(sample.x0, true);
    auto y = tape.constant(sample.y);
    auto bound = BoundWeights<T>::bind(tape, weights, cfg, false);
    auto out = network_forward(x0, y, sample.op, bound, cfg);
    return erf_from_output(tape, out.recon, x0);
}

// Support size: pixels whose normalized ERF exceeds the threshold.
template <typename T>
std::size_t erf_support(const Tensor<T>& map, double threshold = 0.01) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < map.numel(); ++i)
        if (static_cast<double>(map[i]) > threshold) ++n;
    return n;
}

}  // namespace ssr::model
