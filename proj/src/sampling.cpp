#include "ssr/physics/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "ssr/rng.hpp"

namespace ssr::phys {

std::size_t SamplingMask::popcount() const {
    std::size_t n = 0;
    for (auto v : mask) n += v;
    return n;
}

SamplingMask make_vd_mask(int H, int W, double R, int calib, std::uint64_t seed) {
    if (H < 1 || W < 1) throw ArgumentError("make_vd_mask: extents must be positive");
    if (R < 1.0) throw ArgumentError("make_vd_mask: rate must be >= 1");
    if (calib < 0 || calib > std::min(H, W))
        throw ArgumentError("make_vd_mask: calibration block does not fit the grid");

    const std::size_t total = static_cast<std::size_t>(H) * W;
    const std::size_t budget =
        static_cast<std::size_t>(std::llround(static_cast<double>(total) / R));
    const std::size_t calib_count = static_cast<std::size_t>(calib) * calib;
    if (budget < calib_count)
        throw ArgumentError("make_vd_mask: sampling budget smaller than calibration block");

    SamplingMask m;
    m.H = H;
    m.W = W;
    m.rate = R;
    m.seed = seed;
    m.calib = calib;
    m.mask.assign(total, 0);

    const int h0 = (H - calib) / 2;
    const int w0 = (W - calib) / 2;
    for (int h = h0; h < h0 + calib; ++h)
        for (int w = w0; w < w0 + calib; ++w) m.mask[static_cast<std::size_t>(h) * W + w] = 1;

    std::size_t remaining = budget - calib_count;
    if (remaining == 0) return m;

    // Weighted sampling without replacement (Efraimidis-Stirling keys):
    // keep the `remaining` candidates with the largest log(u)/w.
    const double sigma = 0.25 * std::min(H, W);
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    Rng rng(mix_seed(seed, 0x6d61736bull));  // "mask"
    struct Key {
        double key;
        std::uint32_t idx;
    };
    std::vector<Key> keys;
    keys.reserve(total - calib_count);
    for (int h = 0; h < H; ++h) {
        double kh = h - H / 2;
        for (int w = 0; w < W; ++w) {
            std::size_t i = static_cast<std::size_t>(h) * W + w;
            double u = rng.uniform();  // one draw per grid point keeps the stream aligned
            if (m.mask[i]) continue;
            double kw = w - W / 2;
            double weight = std::exp(-(kh * kh + kw * kw) * inv_two_sigma2);
            while (u <= 0.0) u = rng.uniform();
            keys.push_back({std::log(u) / weight, static_cast<std::uint32_t>(i)});
        }
    }
    if (remaining > keys.size()) remaining = keys.size();
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(remaining) - 1,
                     keys.end(), [](const Key& a, const Key& b) {
                         return a.key > b.key || (a.key == b.key && a.idx < b.idx);
                     });
    for (std::size_t i = 0; i < remaining; ++i) m.mask[keys[i].idx] = 1;
    return m;
}

std::vector<int> subsample_views(int n_full, double R) {
    if (n_full < 1) throw ArgumentError("subsample_views: n_full must be positive");
    if (R < 1.0) throw ArgumentError("subsample_views: rate must be >= 1");
    if (R > n_full) throw ArgumentError("subsample_views: rate exceeds view count");
    int count = static_cast<int>(static_cast<double>(n_full) / R);
    std::vector<int> views;
    views.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        int v = static_cast<int>(std::llround(i * R));
        v = std::min(v, n_full - 1);
        if (!views.empty() && v <= views.back()) v = views.back() + 1;
        views.push_back(v);
    }
    return views;
}

}  // namespace ssr::phys
