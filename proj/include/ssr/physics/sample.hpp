#pragma once

#include <optional>

#include "ssr/physics/operator.hpp"

namespace ssr::phys {

// One reconstruction item: reference image, measurements produced from it by
// the stored operator (plus recorded noise), and the linear reconstruction.
template <typename T>
struct ReconSample {
    Tensor<T> ref;          // H x W x P ground truth
    Tensor<T> y;            // measurements (normalized domain)
    Tensor<T> x0;           // linear_recon(y, op)
    ImagingOperator<T> op;
    double noise_std = 0.0;  // per-component std of added complex Gaussian noise
};

struct SimParams {
    Modality modality = Modality::MRI;
    int size = 64;
    double rate = 4.0;
    int n_coils = 4;       // MRI
    int calib = 16;        // MRI calibration block
    int views_full = 60;   // CT full-scan view count
    double noise_snr_db = 0.0;  // 0 disables noise
};

// Deterministic generation: everything derives from (params, seed). The coil
// set is a fixed construction shared by all samples of a dataset.
template <typename T>
ReconSample<T> gen_sample(const SimParams& p, std::uint64_t seed) {
    ReconSample<T> s;
    s.ref = gen_phantom<T>(p.size, p.size, seed, p.modality);
    if (p.modality == Modality::MRI) {
        SamplingMask mask = make_vd_mask(p.size, p.size, p.rate, p.calib, mix_seed(seed, 1));
        s.op = ImagingOperator<T>::make_mri(std::move(mask), gen_coils<T>(p.size, p.size, p.n_coils));
    } else {
        s.op = ImagingOperator<T>::make_ct(p.size, p.size, p.views_full,
                                           subsample_views(p.views_full, p.rate));
    }
    s.y = s.op.forward(s.ref);
    if (p.noise_snr_db > 0.0) {
        double ss = 0.0;
        std::size_t live = 0;
        for (std::size_t i = 0; i < s.y.numel(); ++i) {
            ss += static_cast<double>(s.y[i]) * s.y[i];
            live += s.y[i] != T(0) ? 1u : 0u;
        }
        double rms = std::sqrt(ss / std::max<std::size_t>(live, 1));
        s.noise_std = rms * std::pow(10.0, -p.noise_snr_db / 20.0);
        Rng rng(mix_seed(seed, 2));
        if (p.modality == Modality::MRI) {
            // noise lands on acquired locations only
            std::size_t plane = static_cast<std::size_t>(p.size) * p.size;
            for (int ci = 0; ci < s.op.n_coils(); ++ci)
                for (std::size_t q = 0; q < plane; ++q) {
                    int h = static_cast<int>(q) / p.size, w = static_cast<int>(q) % p.size;
                    double nr = rng.normal(0.0, s.noise_std);
                    double ni = rng.normal(0.0, s.noise_std);
                    if (!s.op.mask().at((h + p.size / 2) % p.size, (w + p.size / 2) % p.size))
                        continue;
                    std::size_t base = (static_cast<std::size_t>(ci) * plane + q) * 2;
                    s.y[base] += static_cast<T>(nr);
                    s.y[base + 1] += static_cast<T>(ni);
                }
        } else {
            for (std::size_t i = 0; i < s.y.numel(); ++i)
                s.y[i] += static_cast<T>(rng.normal(0.0, s.noise_std));
        }
    }
    s.x0 = linear_recon(s.y, s.op);
    return s;
}

}  // namespace ssr::phys
