#pragma once

#include "ssr/conv2d.hpp"
#include "ssr/model/weights.hpp"
#include "ssr/ops.hpp"
#include "ssr/physics/nodes.hpp"
#include "ssr/ssm/block.hpp"

namespace ssr::model {

using phys::ImagingOperator;

// Per-scale products of one PD-SSM module application.
template <typename T>
struct ScaleOutput {
    tg::Val<T> f;       // concat(u, u_dc), the autoregressive feature map
    tg::Val<T> u;       // decoded image estimate
    tg::Val<T> u_dc;    // data-consistent estimate
    tg::Val<T> latent;  // g_s, the contextualized feature map
};

template <typename T>
struct NetworkOutput {
    tg::Val<T> recon;                          // final cascade output
    std::vector<ScaleOutput<T>> last_scales;   // per-scale products of cascade K
    std::vector<tg::Val<T>> cascade_outputs;   // x_hat_k for k = 1..K
};

// Encoder: sigma(Conv_down(sigma(Conv(f)))); Conv expands to C_s channels at
// full resolution, Conv_down strides down by 2^(S-s).
template <typename T>
tg::Val<T> encode_scale(tg::Val<T> f_prev, int cascade, int s, const BoundWeights<T>& w,
                        const ModelConfig& cfg) {
    std::string base = "scale" + std::to_string(s) + "/";
    auto a = tg::silu(tg::conv2d(f_prev, w.at(cascade, base + "enc1.kernel"),
                                 w.at(cascade, base + "enc1.bias"), 1, tg::ConvMode::Same));
    return tg::silu(tg::conv2d(a, w.at(cascade, base + "enc_down.kernel"),
                               w.at(cascade, base + "enc_down.bias"), cfg.scale_stride(s),
                               tg::ConvMode::Down));
}

// Decoder: Conv(sigma(Conv_up(g))); Conv_up restores full resolution at C
// channels, the final Conv reduces to the image channel count.
template <typename T>
tg::Val<T> decode_scale(tg::Val<T> g, int cascade, int s, const BoundWeights<T>& w,
                        const ModelConfig& cfg) {
    std::string base = "scale" + std::to_string(s) + "/";
    auto a = tg::silu(tg::conv2d(g, w.at(cascade, base + "dec_up.kernel"),
                                 w.at(cascade, base + "dec_up.bias"), cfg.scale_stride(s),
                                 tg::ConvMode::Up));
    return tg::conv2d(a, w.at(cascade, base + "dec2.kernel"), w.at(cascade, base + "dec2.bias"), 1,
                      tg::ConvMode::Same);
}

// One PD-SSM module: encode to scale s, contextualize through the compressed
// SSM block, decode to image resolution, and concatenate the decoded image
// with its data-consistent version.
template <typename T>
ScaleOutput<T> pdssm_forward(tg::Val<T> f_prev, int cascade, int s, tg::Val<T> y,
                             const ImagingOperator<T>& op, const BoundWeights<T>& w,
                             const ModelConfig& cfg) {
    ScaleOutput<T> out;
    auto d = encode_scale(f_prev, cascade, s, w, cfg);
    if (cfg.no_ssm) {
        out.latent = d;
    } else {
        std::string base = "scale" + std::to_string(s) + "/";
        out.latent = ssm::compressed_ssm_block(d, w.at(cascade, base + "ssm.A"),
                                               w.at(cascade, base + "ssm.B"),
                                               w.at(cascade, base + "ssm.C"), cfg.compression,
                                               cfg.scan_order);
    }
    out.u = decode_scale(out.latent, cascade, s, w, cfg);
    out.u_dc = cfg.no_dc ? out.u : phys::dc_step(out.u, y, op);
    out.f = tg::concat_ch<T>({out.u, out.u_dc});
    return out;
}

// One cascade: S autoregressive PD-SSM modules (each conditioned on the
// concatenation of all earlier feature maps) followed by the refinement
// module Conv(sigma(Conv(f_S))).
template <typename T>
std::pair<tg::Val<T>, std::vector<ScaleOutput<T>>> cascade_forward(tg::Val<T> x_prev, int cascade,
                                                                   tg::Val<T> y,
                                                                   const ImagingOperator<T>& op,
                                                                   const BoundWeights<T>& w,
                                                                   const ModelConfig& cfg) {
    std::vector<ScaleOutput<T>> scales;
    tg::Val<T> f = x_prev;
    if (!cfg.no_pdssm) {
        if (cfg.no_ar) {
            scales.push_back(pdssm_forward(x_prev, cascade, cfg.scales, y, op, w, cfg));
            f = scales.back().f;
        } else {
            std::vector<tg::Val<T>> history{x_prev};
            for (int s = 1; s <= cfg.scales; ++s) {
                auto f_in = history.size() == 1 ? history[0] : tg::concat_ch<T>(history);
                scales.push_back(pdssm_forward(f_in, cascade, s, y, op, w, cfg));
                history.push_back(scales.back().f);
            }
            f = scales.back().f;
        }
    }
    auto a = tg::silu(tg::conv2d(f, w.at(cascade, "refine1.kernel"), w.at(cascade, "refine1.bias"),
                                 1, tg::ConvMode::Same));
    auto xk = tg::conv2d(a, w.at(cascade, "refine2.kernel"), w.at(cascade, "refine2.bias"), 1,
                         tg::ConvMode::Same);
    return {xk, std::move(scales)};
}

// Unrolled network: K cascades chained from the linear reconstruction. The
// per-scale products of the final cascade are retained for the multi-scale
// decoding loss.
template <typename T>
NetworkOutput<T> network_forward(tg::Val<T> x0, tg::Val<T> y, const ImagingOperator<T>& op,
                                 const BoundWeights<T>& w, const ModelConfig& cfg) {
    const auto& dims = x0.value().dims();
    if (dims.size() != 3 || dims[2] != cfg.image_channels)
        throw ConfigError("network_forward: input must be HxWxP");
    cfg.validate_resolution(dims[0], dims[1]);

    NetworkOutput<T> out;
    tg::Val<T> x = x0;
    for (int k = 1; k <= cfg.cascades; ++k) {
        auto [xk, scales] = cascade_forward(x, k, y, op, w, cfg);
        x = xk;
        out.cascade_outputs.push_back(xk);
        if (k == cfg.cascades) out.last_scales = std::move(scales);
    }
    out.recon = x;
    return out;
}

}  // namespace ssr::model
