#include "ssr/io/pgm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ssr::io {

void write_pgm16(const std::string& path, const std::vector<double>& values, int H, int W) {
    if (static_cast<std::size_t>(H) * W != values.size())
        throw ArgumentError("write_pgm16: value count does not match extents");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "P5\n" << W << " " << H << "\n65535\n";
    for (double v : values) {
        double c = std::min(1.0, std::max(0.0, v));
        auto q = static_cast<unsigned>(std::lround(c * 65535.0));
        unsigned char hi = static_cast<unsigned char>((q >> 8) & 0xFF);
        unsigned char lo = static_cast<unsigned char>(q & 0xFF);
        f.put(static_cast<char>(hi));
        f.put(static_cast<char>(lo));
    }
    if (!f) throw IoError("short write to " + path);
}

}  // namespace ssr::io
