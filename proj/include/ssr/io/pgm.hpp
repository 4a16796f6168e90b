#pragma once

#include <string>
#include <vector>

#include "ssr/common.hpp"

namespace ssr::io {

// Writes a 16-bit binary PGM (P5, maxval 65535, big-endian samples) from
// values expected in [0, 1]; out-of-range values are clamped.
void write_pgm16(const std::string& path, const std::vector<double>& values, int H, int W);

}  // namespace ssr::io
