#pragma once

#include <cmath>
#include <functional>
#include <thread>
#include <numeric>
#include <optional>

#include "ssr/adam.hpp"
#include "ssr/metrics.hpp"
#include "ssr/model/network.hpp"
#include "ssr/physics/sample.hpp"
#include "ssr/train/loss.hpp"

namespace ssr::train {

using phys::ReconSample;

struct TrainConfig {
    int epochs = 50;
    double lr = 1e-4;
    int batch_size = 4;
    std::uint64_t seed = 0;
    LossMode loss_mode = LossMode::Dmsd;
    int val_cadence = 1;
    std::string dtype = "f32";
    std::string data_dir;

    void validate() const {
        if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
        // lr = 0 is admitted as a degenerate no-update mode for determinism
        // checks; any real rate must lie in the search range.
        if (lr != 0.0 && (lr < 1e-6 || lr > 1e-3))
            throw ConfigError("train config: lr must lie in [1e-6, 1e-3]");
        if (batch_size < 1) throw ConfigError("train config: batch size must be >= 1");
        if (val_cadence < 1) throw ConfigError("train config: val cadence must be >= 1");
    }

    nlohmann::json to_json() const {
        return {{"epochs", epochs},       {"lr", lr},
                {"batch_size", batch_size}, {"seed", seed},
                {"loss_mode", loss_mode_name(loss_mode)}, {"val_cadence", val_cadence},
                {"dtype", dtype},         {"data", data_dir}};
    }

    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        c.epochs = j.value("epochs", c.epochs);
        c.lr = j.value("lr", c.lr);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.seed = j.value("seed", c.seed);
        if (j.contains("loss_mode")) c.loss_mode = loss_mode_from_name(j["loss_mode"]);
        c.val_cadence = j.value("val_cadence", c.val_cadence);
        c.dtype = j.value("dtype", c.dtype);
        c.data_dir = j.value("data", c.data_dir);
        c.validate();
        return c;
    }
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    bool has_val = false;
    double val_loss = 0.0;
    double val_psnr = 0.0;
    double val_ssim = 0.0;
};

template <typename T>
struct TrainResult {
    model::ModelWeights<T> final_weights;
    model::ModelWeights<T> best_weights;
    int best_epoch = 0;
    double best_val_psnr = -1e30;
    std::vector<EpochStats> history;
};

namespace loop_detail {

// One sample's contribution: loss value plus per-key gradients.
template <typename T>
struct SampleGrad {
    double loss = 0.0;
    std::map<std::string, tg::Tensor<T>> grads;
};

template <typename T>
SampleGrad<T> sample_gradient(const ReconSample<T>& s, const model::ModelWeights<T>& w,
                              const model::ModelConfig& cfg, LossMode mode) {
    tg::Tape<T> tape;
    auto bound = model::BoundWeights<T>::bind(tape, w, cfg, true);
    auto x0 = tape.constant(s.x0);
    auto y = tape.constant(s.y);
    auto x_ref = tape.constant(s.ref);
    auto out = model::network_forward(x0, y, s.op, bound, cfg);
    auto loss = total_loss(out, x_ref, mode, cfg, bound);
    tape.backward(loss);
    SampleGrad<T> g;
    g.loss = static_cast<double>(loss.value().item());
    for (const auto& [key, val] : bound.vals) g.grads.emplace(key, tape.grad_or_zero(val));
    return g;
}

template <typename T>
std::string first_non_finite(const std::map<std::string, tg::Tensor<T>>& tensors) {
    for (const auto& [key, t] : tensors)
        for (std::size_t i = 0; i < t.numel(); ++i)
            if (!std::isfinite(static_cast<double>(t[i]))) return key;
    return {};
}

}  // namespace loop_detail

// Forward pass without gradient recording.
template <typename T>
tg::Tensor<T> infer(const ReconSample<T>& s, const model::ModelWeights<T>& w,
                    const model::ModelConfig& cfg) {
    tg::Tape<T> tape;
    tape.set_grad_enabled(false);
    auto bound = model::BoundWeights<T>::bind(tape, w, cfg, false);
    auto out = model::network_forward(tape.constant(s.x0), tape.constant(s.y), s.op, bound, cfg);
    return out.recon.value();
}

template <typename T>
metrics::MetricReport evaluate_model(const std::vector<ReconSample<T>>& samples,
                                     const model::ModelWeights<T>& w,
                                     const model::ModelConfig& cfg) {
    metrics::MetricReport report;
    for (const auto& s : samples) {
        tg::Tensor<T> rec = infer(s, w, cfg);
        report.add(metrics::psnr(rec, s.ref), metrics::ssim(rec, s.ref));
    }
    return report;
}

// Metrics of the linear (ZF / FBP) baseline, recomputed from y.
template <typename T>
metrics::MetricReport evaluate_baseline(const std::vector<ReconSample<T>>& samples) {
    metrics::MetricReport report;
    for (const auto& s : samples) {
        tg::Tensor<T> rec = phys::linear_recon(s.y, s.op);
        report.add(metrics::psnr(rec, s.ref), metrics::ssim(rec, s.ref));
    }
    return report;
}

// Deterministic training loop: seeded init, seeded per-epoch shuffles,
// batch-parallel gradient evaluation with an ordered reduction, Adam updates,
// best-checkpoint selection on validation PSNR.
template <typename T>
TrainResult<T> train_loop(const TrainConfig& tc, const model::ModelConfig& cfg,
                          const std::vector<ReconSample<T>>& train_set,
                          const std::vector<ReconSample<T>>& val_set,
                          const std::function<void(const EpochStats&)>& on_epoch = {}) {
    tc.validate();
    cfg.validate();
    if (train_set.empty()) throw ConfigError("train_loop: empty training set");
    for (const auto& s : train_set)
        if (s.op.image_channels() != cfg.image_channels)
            throw ConfigError("train_loop: dataset modality does not match model P");

    TrainResult<T> r;
    r.final_weights = model::ModelWeights<T>::init(cfg, tc.seed);
    tg::AdamState<T> opt(static_cast<T>(tc.lr));

    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(tc.seed, 0x65706f00ull + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(tc.batch_size)) {
            std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(tc.batch_size));
            std::size_t bn = b1 - b0;
            // bounded worker pool, results merged in sample order so the
            // accumulation stays bitwise deterministic
            std::vector<loop_detail::SampleGrad<T>> results(bn);
            std::size_t workers =
                std::min<std::size_t>(bn, std::max(1u, std::thread::hardware_concurrency()));
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t i = w; i < bn; i += workers)
                        results[i] = loop_detail::sample_gradient(
                            train_set[static_cast<std::size_t>(order[b0 + i])], r.final_weights,
                            cfg, tc.loss_mode);
                });
            for (auto& th : pool) th.join();
            std::map<std::string, tg::Tensor<T>> grads;
            double batch_loss = 0.0;
            for (auto& g : results) {
                batch_loss += g.loss;
                if (grads.empty()) {
                    grads = std::move(g.grads);
                } else {
                    for (auto& [key, acc] : grads)
                        tg::detail::accumulate(acc, g.grads.at(key));
                }
            }
            T inv = static_cast<T>(1.0 / static_cast<double>(b1 - b0));
            for (auto& [key, gsum] : grads)
                for (std::size_t i = 0; i < gsum.numel(); ++i) gsum[i] *= inv;
            batch_loss /= static_cast<double>(b1 - b0);
            if (!std::isfinite(batch_loss)) {
                std::string culprit = loop_detail::first_non_finite(grads);
                if (culprit.empty()) culprit = loop_detail::first_non_finite(r.final_weights.params);
                if (culprit.empty()) culprit = "<loss>";
                throw Error("training aborted: non-finite loss at epoch " + std::to_string(epoch) +
                            "; first non-finite tensor: " + culprit);
            }
            tg::adam_step(r.final_weights.params, grads, opt);
            epoch_loss += batch_loss * static_cast<double>(b1 - b0);
        }
        epoch_loss /= static_cast<double>(order.size());

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss;
        bool run_val = !val_set.empty() && (epoch % tc.val_cadence == 0 || epoch == tc.epochs);
        if (run_val) {
            double vloss = 0.0;
            metrics::MetricReport rep;
            for (const auto& s : val_set) {
                tg::Tape<T> tape;
                tape.set_grad_enabled(false);
                auto bound = model::BoundWeights<T>::bind(tape, r.final_weights, cfg, false);
                auto out = model::network_forward(tape.constant(s.x0), tape.constant(s.y), s.op,
                                                  bound, cfg);
                auto loss = total_loss(out, tape.constant(s.ref), tc.loss_mode, cfg, bound);
                vloss += static_cast<double>(loss.value().item());
                rep.add(metrics::psnr(out.recon.value(), s.ref),
                        metrics::ssim(out.recon.value(), s.ref));
            }
            stats.has_val = true;
            stats.val_loss = vloss / static_cast<double>(val_set.size());
            stats.val_psnr = rep.mean_psnr();
            stats.val_ssim = rep.mean_ssim();
            if (stats.val_psnr > r.best_val_psnr) {
                r.best_val_psnr = stats.val_psnr;
                r.best_epoch = epoch;
                r.best_weights = r.final_weights;
            }
        }
        r.history.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    if (r.best_epoch == 0) {
        r.best_weights = r.final_weights;
        r.best_epoch = tc.epochs;
    }
    return r;
}

}  // namespace ssr::train
