#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

#include "ssr/io/sysmem.hpp"
#include "ssr/train/loop.hpp"

namespace ssr::bench {

struct BenchResult {
    std::vector<double> run_ms;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    std::size_t peak_rss_delta_bytes = 0;
};

// Wall-clock per-sample inference latency (strictly serial) and the peak
// resident-set delta around the measured runs. Numbers are informational and
// hardware-dependent.
template <typename T>
BenchResult bench_inference(const phys::ReconSample<T>& sample, const model::ModelWeights<T>& w,
                            const model::ModelConfig& cfg, int n_warmup = 3, int n_runs = 20) {
    if (n_runs < 1) throw ArgumentError("bench: need at least one run");
    BenchResult r;
    for (int i = 0; i < n_warmup; ++i) train::infer(sample, w, cfg);
    std::size_t rss_before = io::peak_rss_bytes();
    for (int i = 0; i < n_runs; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        train::infer(sample, w, cfg);
        auto t1 = std::chrono::steady_clock::now();
        r.run_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::size_t rss_after = io::peak_rss_bytes();
    r.peak_rss_delta_bytes = rss_after >= rss_before ? rss_after - rss_before : 0;
    for (double v : r.run_ms) r.mean_ms += v;
    r.mean_ms /= static_cast<double>(r.run_ms.size());
    std::vector<double> sorted = r.run_ms;
    std::sort(sorted.begin(), sorted.end());
    std::size_t mid = sorted.size() / 2;
    r.median_ms = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return r;
}

}  // namespace ssr::bench
