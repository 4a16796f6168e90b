#pragma once

#include <map>
#include <string>
#include <vector>

#include "ssr/model/config.hpp"
#include "ssr/rng.hpp"
#include "ssr/ssm/scan.hpp"
#include "ssr/tape.hpp"

namespace ssr::model {

using tg::Shape;
using tg::Tensor;

// Key scheme: cascade{k}/scale{s}/{enc1|enc_down|dec_up|dec2}.{kernel|bias},
// cascade{k}/scale{s}/ssm.{A|B|C}, cascade{k}/refine{1|2}.{kernel|bias}.
// Keys are enumerated in a fixed construction order so seeded initialization
// is reproducible; lookups go through the sorted map.
struct WeightSpec {
    std::string key;
    Shape shape;
    bool is_kernel;  // uniform fan-in init; biases are zero
};

inline std::vector<WeightSpec> enumerate_weights(const ModelConfig& cfg) {
    cfg.validate();
    std::vector<WeightSpec> specs;
    int n_cascades = cfg.share_weights ? 1 : cfg.cascades;
    int P = cfg.image_channels;
    for (int k = 1; k <= n_cascades; ++k) {
        std::string ck = "cascade" + std::to_string(k) + "/";
        for (int s : cfg.active_scales()) {
            std::string base = ck + "scale" + std::to_string(s) + "/";
            int cs = cfg.scale_channels(s);
            int cin = cfg.encoder_in_channels(s);
            specs.push_back({base + "enc1.kernel", {3, 3, cin, cs}, true});
            specs.push_back({base + "enc1.bias", {cs}, false});
            specs.push_back({base + "enc_down.kernel", {3, 3, cs, cs}, true});
            specs.push_back({base + "enc_down.bias", {cs}, false});
            if (!cfg.no_ssm) {
                specs.push_back({base + "ssm.A", {cfg.state_dim, cfg.state_dim}, false});
                specs.push_back({base + "ssm.B", {cfg.state_dim, 1}, false});
                specs.push_back({base + "ssm.C", {1, cfg.state_dim}, false});
            }
            specs.push_back({base + "dec_up.kernel", {3, 3, cfg.channels, cs}, true});
            specs.push_back({base + "dec_up.bias", {cfg.channels}, false});
            specs.push_back({base + "dec2.kernel", {3, 3, cfg.channels, P}, true});
            specs.push_back({base + "dec2.bias", {P}, false});
        }
        specs.push_back({ck + "refine1.kernel", {3, 3, cfg.refine_in_channels(), cfg.channels}, true});
        specs.push_back({ck + "refine1.bias", {cfg.channels}, false});
        specs.push_back({ck + "refine2.kernel", {3, 3, cfg.channels, P}, true});
        specs.push_back({ck + "refine2.bias", {P}, false});
    }
    return specs;
}

template <typename T>
struct ModelWeights {
    std::map<std::string, Tensor<T>> params;

    static ModelWeights init(const ModelConfig& cfg, std::uint64_t seed) {
        ModelWeights w;
        Rng rng(mix_seed(seed, 0x77696e69ull));  // "wini"
        for (const WeightSpec& spec : enumerate_weights(cfg)) {
            if (spec.key.size() >= 5 && spec.key.substr(spec.key.size() - 5) == "ssm.A") {
                Tensor<T> A, B, C;
                ssm::init_ssm_params(A, B, C, cfg.state_dim, rng);
                w.params.emplace(spec.key, std::move(A));
                // B and C specs follow immediately; fill them here and skip
                // their zero-initialized entries below
                w.params.emplace(spec.key.substr(0, spec.key.size() - 1) + "B", std::move(B));
                w.params.emplace(spec.key.substr(0, spec.key.size() - 1) + "C", std::move(C));
                continue;
            }
            if (w.params.count(spec.key)) continue;  // ssm.B / ssm.C already placed
            Tensor<T> t(spec.shape);
            if (spec.is_kernel) {
                double bound = 1.0 / std::sqrt(9.0 * spec.shape[2]);
                for (std::size_t i = 0; i < t.numel(); ++i)
                    t[i] = static_cast<T>(rng.uniform(-bound, bound));
            }
            w.params.emplace(spec.key, std::move(t));
        }
        return w;
    }

    const Tensor<T>& at(const std::string& key) const {
        auto it = params.find(key);
        if (it == params.end()) throw StateError("missing weight key: " + key);
        return it->second;
    }
};

// Weights bound onto a tape as leaves. Training binds with requires_grad so
// every parameter key collects a gradient; inference binds constants.
template <typename T>
struct BoundWeights {
    std::map<std::string, tg::Val<T>> vals;
    bool shared = false;
    int cascades = 1;

    static BoundWeights bind(tg::Tape<T>& tape, const ModelWeights<T>& w, const ModelConfig& cfg,
                             bool requires_grad) {
        BoundWeights b;
        b.shared = cfg.share_weights;
        b.cascades = cfg.cascades;
        for (const auto& [key, tensor] : w.params) b.vals.emplace(key, tape.leaf(tensor, requires_grad));
        return b;
    }

    tg::Val<T> at(int cascade, const std::string& suffix) const {
        int k = shared ? 1 : cascade;
        std::string key = "cascade" + std::to_string(k) + "/" + suffix;
        auto it = vals.find(key);
        if (it == vals.end()) throw StateError("missing bound weight: " + key);
        return it->second;
    }
};

}  // namespace ssr::model
