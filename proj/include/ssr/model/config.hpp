#pragma once

#include <json.hpp>
#include <string>

#include "ssr/common.hpp"
#include "ssr/ssm/layout.hpp"

namespace ssr::model {

// Architecture hyperparameters. JSON keys follow the short field names
// (S, K, C, J, D, P) used throughout the configuration surface.
struct ModelConfig {
    int scales = 3;          // S: spatial scales per cascade
    int cascades = 5;        // K: unrolled cascades (5 MRI / 3 CT defaults)
    int channels = 32;       // C: channel count at scale S
    int compression = 4;     // J: space-to-depth factor in the SSM block
    int state_dim = 16;      // D: SSM state dimensionality
    int image_channels = 2;  // P: 2 for complex MRI, 1 for CT
    ssm::ScanOrder scan_order = ssm::ScanOrder::Raster;
    bool no_ar = false;      // single full-resolution PD-SSM per cascade
    bool no_ssm = false;     // compressed SSM block becomes identity
    bool no_dc = false;      // data-consistency projection becomes identity
    bool no_pdssm = false;   // cascades reduce to their refinement module
    bool share_weights = false;  // all cascades reuse cascade 1 parameters

    void validate() const {
        if (scales < 1 || cascades < 1) throw ConfigError("model config: S and K must be >= 1");
        if (channels < 1 || compression < 1 || state_dim < 1)
            throw ConfigError("model config: C, J, D must be >= 1");
        if (image_channels != 1 && image_channels != 2)
            throw ConfigError("model config: P must be 1 or 2");
    }

    // Channel count at scale s (1-based): C_s = 2^(S-s) * C.
    int scale_channels(int s) const { return (1 << (scales - s)) * channels; }

    // Down/upsampling stride at scale s: 2^(S-s).
    int scale_stride(int s) const { return 1 << (scales - s); }

    // Input channel count of the scale-s encoder: P*(2s-1) feature maps from
    // all coarser scales plus the cascade input, or just P without
    // autoregression.
    int encoder_in_channels(int s) const {
        return no_ar ? image_channels : image_channels * (2 * s - 1);
    }

    int refine_in_channels() const { return no_pdssm ? image_channels : 2 * image_channels; }

    // Scales instantiated per cascade. no_ar keeps only the native scale.
    std::vector<int> active_scales() const {
        if (no_pdssm) return {};
        if (no_ar) return {scales};
        std::vector<int> out;
        for (int s = 1; s <= scales; ++s) out.push_back(s);
        return out;
    }

    // Working resolutions must be integral and compatible with J.
    void validate_resolution(int H, int W) const {
        validate();
        for (int s : active_scales()) {
            int f = scale_stride(s);
            if (H % f != 0 || W % f != 0)
                throw ConfigError("resolution " + std::to_string(H) + "x" + std::to_string(W) +
                                  " not divisible by scale factor " + std::to_string(f));
            if (!no_ssm && ((H / f) % compression != 0 || (W / f) % compression != 0))
                throw ConfigError("scale-" + std::to_string(s) +
                                  " resolution not divisible by compression factor J");
        }
    }

    nlohmann::json to_json() const {
        return {{"S", scales},
                {"K", cascades},
                {"C", channels},
                {"J", compression},
                {"D", state_dim},
                {"P", image_channels},
                {"scan_order", ssm::scan_order_name(scan_order)},
                {"no_ar", no_ar},
                {"no_ssm", no_ssm},
                {"no_dc", no_dc},
                {"no_pdssm", no_pdssm},
                {"share_weights", share_weights}};
    }

    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        c.scales = j.value("S", c.scales);
        c.cascades = j.value("K", c.cascades);
        c.channels = j.value("C", c.channels);
        c.compression = j.value("J", c.compression);
        c.state_dim = j.value("D", c.state_dim);
        c.image_channels = j.value("P", c.image_channels);
        if (j.contains("scan_order"))
            c.scan_order = ssm::scan_order_from_name(j["scan_order"].get<std::string>());
        c.no_ar = j.value("no_ar", false);
        c.no_ssm = j.value("no_ssm", false);
        c.no_dc = j.value("no_dc", false);
        c.no_pdssm = j.value("no_pdssm", false);
        c.share_weights = j.value("share_weights", false);
        c.validate();
        return c;
    }
};

}  // namespace ssr::model
