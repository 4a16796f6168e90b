#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "ssr/tensor.hpp"

namespace ssr::io {

using tg::Shape;
using tg::Tensor;

// MRTX container: magic "MRTX", version u32=1, ndim u32, dims u32[ndim],
// dtype u8 (1 = f32, 2 = f64), then the row-major payload. All integers and
// scalars are little-endian.

namespace mrtx_detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

template <typename T>
void put_scalar(std::ostream& os, T v) {
    if constexpr (sizeof(T) == 4) {
        put_u32(os, std::bit_cast<std::uint32_t>(v));
    } else {
        auto u = std::bit_cast<std::uint64_t>(v);
        put_u32(os, static_cast<std::uint32_t>(u & 0xFFFFFFFFull));
        put_u32(os, static_cast<std::uint32_t>(u >> 32));
    }
}

template <typename T>
T get_scalar(std::istream& is) {
    if constexpr (sizeof(T) == 4) {
        return std::bit_cast<T>(get_u32(is));
    } else {
        std::uint64_t lo = get_u32(is);
        std::uint64_t hi = get_u32(is);
        return std::bit_cast<T>(lo | (hi << 32));
    }
}

}  // namespace mrtx_detail

template <typename T>
void write_mrtx(const std::string& path, const Tensor<T>& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("mrtx: cannot open " + path + " for writing");
    f.write("MRTX", 4);
    mrtx_detail::put_u32(f, 1);
    mrtx_detail::put_u32(f, static_cast<std::uint32_t>(t.ndim()));
    for (int i = 0; i < t.ndim(); ++i) mrtx_detail::put_u32(f, static_cast<std::uint32_t>(t.dim(i)));
    f.put(static_cast<char>(static_cast<std::uint8_t>(dtype_of<T>::value)));
    for (std::size_t i = 0; i < t.numel(); ++i) mrtx_detail::put_scalar(f, t[i]);
    if (!f) throw IoError("mrtx: short write to " + path);
}

inline std::pair<Shape, DType> read_mrtx_header(std::istream& f, const std::string& path) {
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "MRTX", 4) != 0)
        throw IoError("mrtx: bad magic in " + path);
    std::uint32_t version = mrtx_detail::get_u32(f);
    if (version != 1) throw IoError("mrtx: unsupported version in " + path);
    std::uint32_t ndim = mrtx_detail::get_u32(f);
    if (ndim == 0 || ndim > 8) throw IoError("mrtx: implausible rank in " + path);
    Shape dims(ndim);
    for (auto& d : dims) {
        std::uint32_t v = mrtx_detail::get_u32(f);
        if (v == 0 || v > (1u << 24)) throw IoError("mrtx: implausible extent in " + path);
        d = static_cast<int>(v);
    }
    int dt = f.get();
    if (dt != 1 && dt != 2) throw IoError("mrtx: unknown dtype in " + path);
    return {dims, static_cast<DType>(dt)};
}

// Reads a tensor, converting the payload to T when the stored dtype differs.
template <typename T>
Tensor<T> read_mrtx(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("mrtx: cannot open " + path);
    auto [dims, dtype] = read_mrtx_header(f, path);
    Tensor<T> t(dims);
    if (dtype == DType::f32) {
        for (std::size_t i = 0; i < t.numel(); ++i)
            t[i] = static_cast<T>(mrtx_detail::get_scalar<float>(f));
    } else {
        for (std::size_t i = 0; i < t.numel(); ++i)
            t[i] = static_cast<T>(mrtx_detail::get_scalar<double>(f));
    }
    if (!f) throw IoError("mrtx: truncated payload in " + path);
    return t;
}

inline DType mrtx_dtype(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("mrtx: cannot open " + path);
    return read_mrtx_header(f, path).second;
}

}  // namespace ssr::io
