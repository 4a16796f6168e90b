#pragma once

#include "ssr/ops.hpp"
#include "ssr/ssm/layout.hpp"
#include "ssr/ssm/scan.hpp"

namespace ssr::ssm {

inline ScanLayout make_layout(int H, int W, int C, int J, ScanOrder order) {
    if (J < 1 || H % J != 0 || W % J != 0)
        throw ArgumentError("compressed ssm block: J must divide the spatial extents");
    return ScanLayout{H / J, W / J, C * J * J, order};
}

// Residual compressed SSM block:
//   g = depth_to_space(unflatten(scan(flatten(space_to_depth(d))))) + d
// The space-to-depth step shortens the scanned sequence by J^2.
template <typename T>
tg::Val<T> compressed_ssm_block(tg::Val<T> d, tg::Val<T> A, tg::Val<T> B, tg::Val<T> C, int J,
                                ScanOrder order) {
    const Tensor<T>& v = d.value();
    if (v.ndim() != 3) throw ShapeError("compressed ssm block expects HxWxC input");
    ScanLayout layout = make_layout(v.dim(0), v.dim(1), v.dim(2), J, order);
    auto tiled = space_to_depth(d, J);
    auto seq = sweep_flatten(tiled, layout);
    auto scanned = ssm_scan(seq, A, B, C);
    auto grid = sweep_unflatten(scanned, layout);
    auto restored = depth_to_space(grid, J);
    return tg::add(restored, d);
}

}  // namespace ssr::ssm
