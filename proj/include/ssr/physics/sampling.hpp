#pragma once

#include <cstdint>
#include <vector>

#include "ssr/common.hpp"

namespace ssr::phys {

// Cartesian k-space sampling pattern in centered layout: element (h, w) of
// the H x W grid corresponds to spatial frequency (h - H/2, w - W/2). The
// operator shifts this to DFT index order internally.
struct SamplingMask {
    int H = 0;
    int W = 0;
    double rate = 1.0;
    std::uint64_t seed = 0;
    int calib = 0;
    std::vector<std::uint8_t> mask;  // H*W entries, row-major, 0/1

    bool at(int h, int w) const { return mask[static_cast<std::size_t>(h) * W + w] != 0; }
    std::size_t popcount() const;
};

// Variable-density random mask: a fully sampled centered calib x calib block
// plus round(H*W/R) - calib^2 further locations drawn without replacement
// with probability proportional to exp(-|k|^2 / (2 sigma^2)),
// sigma = 0.25 * min(H, W).
SamplingMask make_vd_mask(int H, int W, double R, int calib, std::uint64_t seed);

// Uniform view subsampling for CT: floor(n_full / R) strictly increasing
// indices round(i * R), clipped to [0, n_full).
std::vector<int> subsample_views(int n_full, double R);

}  // namespace ssr::phys
