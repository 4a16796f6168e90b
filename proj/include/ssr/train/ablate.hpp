#pragma once

#include "ssr/train/loop.hpp"

namespace ssr::train {

struct AblationRow {
    std::string variant;
    double psnr_mean = 0.0;
    double psnr_std = 0.0;
    double ssim_mean = 0.0;
    double ssim_std = 0.0;
};

// Named architecture/loss variants relative to a base configuration.
// Architecture flags map onto ModelConfig; loss names switch the training
// objective; "S=n" and "J=n" entries sweep design parameters.
inline std::pair<model::ModelConfig, LossMode> apply_variant(const model::ModelConfig& base,
                                                             LossMode base_mode,
                                                             const std::string& name) {
    model::ModelConfig cfg = base;
    LossMode mode = base_mode;
    if (name == "full") {
    } else if (name == "no_pdssm") {
        cfg.no_pdssm = true;
    } else if (name == "no_ar") {
        cfg.no_ar = true;
    } else if (name == "no_ssm") {
        cfg.no_ssm = true;
    } else if (name == "no_dc") {
        cfg.no_dc = true;
    } else if (name == "shallow_ss") {
        mode = LossMode::ShallowSS;
    } else if (name == "shallow_ms") {
        mode = LossMode::ShallowMS;
    } else if (name == "deep_msl") {
        mode = LossMode::DeepMSL;
    } else if (name.rfind("S=", 0) == 0) {
        cfg.scales = std::stoi(name.substr(2));
    } else if (name.rfind("J=", 0) == 0) {
        cfg.compression = std::stoi(name.substr(2));
    } else {
        throw ArgumentError("unknown ablation variant: " + name);
    }
    cfg.validate();
    return {cfg, mode};
}

// Trains every requested variant on the shared splits under the same budget
// and seed, and scores each on the shared test split.
template <typename T>
std::vector<AblationRow> ablation_suite(
    const TrainConfig& tc, const model::ModelConfig& base,
    const std::vector<phys::ReconSample<T>>& train_set,
    const std::vector<phys::ReconSample<T>>& val_set,
    const std::vector<phys::ReconSample<T>>& test_set, const std::vector<std::string>& variants,
    const std::function<void(const std::string&, const AblationRow&,
                             const model::ModelConfig&, const model::ModelWeights<T>&)>&
        on_variant = {}) {
    std::vector<AblationRow> rows;
    for (const std::string& name : variants) {
        auto [cfg, mode] = apply_variant(base, tc.loss_mode, name);
        TrainConfig vt = tc;
        vt.loss_mode = mode;
        auto result = train_loop(vt, cfg, train_set, val_set);
        metrics::MetricReport rep = evaluate_model(test_set, result.best_weights, cfg);
        AblationRow row;
        row.variant = name;
        std::tie(row.psnr_mean, row.psnr_std) = metrics::MetricReport::mean_std(rep.psnr_values);
        std::tie(row.ssim_mean, row.ssim_std) = metrics::MetricReport::mean_std(rep.ssim_values);
        rows.push_back(row);
        if (on_variant) on_variant(name, row, cfg, result.best_weights);
    }
    return rows;
}

}  // namespace ssr::train
