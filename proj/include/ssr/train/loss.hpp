#pragma once

#include "ssr/model/network.hpp"

namespace ssr::train {

using model::BoundWeights;
using model::ModelConfig;
using model::NetworkOutput;

enum class LossMode { Dmsd, ShallowSS, ShallowMS, DeepMSL };

inline LossMode loss_mode_from_name(const std::string& s) {
    if (s == "dmsd") return LossMode::Dmsd;
    if (s == "shallow_ss") return LossMode::ShallowSS;
    if (s == "shallow_ms") return LossMode::ShallowMS;
    if (s == "deep_msl") return LossMode::DeepMSL;
    throw ArgumentError("unknown loss mode: " + s);
}

inline std::string loss_mode_name(LossMode m) {
    switch (m) {
        case LossMode::Dmsd: return "dmsd";
        case LossMode::ShallowSS: return "shallow_ss";
        case LossMode::ShallowMS: return "shallow_ms";
        default: return "deep_msl";
    }
}

// Deep multi-scale decoding term: sum over scales of the L1 distance between
// the final cascade's data-consistent per-scale estimates and the reference.
template <typename T>
tg::Val<T> dmsd_loss(const NetworkOutput<T>& out, tg::Val<T> x_ref) {
    if (out.last_scales.empty())
        throw StateError("dmsd_loss: network output carries no per-scale estimates");
    tg::Val<T> acc;
    for (const auto& s : out.last_scales) {
        auto term = tg::l1_loss(s.u_dc, x_ref);
        acc = acc.valid() ? tg::add(acc, term) : term;
    }
    return acc;
}

// Total training objective. All modes share the reconstruction term
// l1(x_hat, x_ref); the variants differ in their multi-scale supervision.
template <typename T>
tg::Val<T> total_loss(const NetworkOutput<T>& out, tg::Val<T> x_ref, LossMode mode,
                      const ModelConfig& cfg, const BoundWeights<T>& weights) {
    auto recon_term = tg::l1_loss(out.recon, x_ref);
    switch (mode) {
        case LossMode::ShallowSS:
            return recon_term;
        case LossMode::Dmsd:
            return tg::add(recon_term, dmsd_loss(out, x_ref));
        case LossMode::ShallowMS: {
            // extra terms on average-pooled outputs at every scale, including
            // the identity pooling at s = S
            tg::Val<T> acc = recon_term;
            for (int s = 1; s <= cfg.scales; ++s) {
                int f = cfg.scale_stride(s);
                auto term = tg::l1_loss(tg::avg_pool2d(out.recon, f), tg::avg_pool2d(x_ref, f));
                acc = tg::add(acc, term);
            }
            return acc;
        }
        case LossMode::DeepMSL: {
            // supervision on latent maps g_s against encodings of the
            // reference. The encoder input is the reference tiled to the
            // expected channel count; the target path carries no gradient.
            if (out.last_scales.empty())
                throw StateError("deep_msl: network output carries no latent maps");
            tg::Val<T> acc = recon_term;
            tg::Tape<T>& tape = *x_ref.tape;
            for (std::size_t i = 0; i < out.last_scales.size(); ++i) {
                int s = cfg.no_ar ? cfg.scales : static_cast<int>(i) + 1;
                int reps = cfg.encoder_in_channels(s) / cfg.image_channels;
                std::vector<tg::Val<T>> tiles(static_cast<std::size_t>(reps),
                                              tape.constant(x_ref.value()));
                auto stacked = reps == 1 ? tiles[0] : tg::concat_ch<T>(tiles);
                tg::Tape<T> frozen;  // target encoding runs off-tape
                auto fb = frozen.constant(stacked.value());
                model::BoundWeights<T> fw;
                fw.shared = weights.shared;
                fw.cascades = weights.cascades;
                for (const auto& [k, v] : weights.vals) fw.vals.emplace(k, frozen.constant(v.value()));
                auto target = model::encode_scale(fb, cfg.cascades, s, fw, cfg);
                auto term = tg::l1_loss(out.last_scales[i].latent, tape.constant(target.value()));
                acc = tg::add(acc, term);
            }
            return acc;
        }
    }
    throw ArgumentError("unknown loss mode");
}

}  // namespace ssr::train
