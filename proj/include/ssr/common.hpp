#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssr {

// Error taxonomy used across the library. The CLI maps ArgumentError and
// ConfigError to exit code 2, everything else to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

struct StateError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

template <typename T>
struct dtype_of;
template <>
struct dtype_of<float> {
    static constexpr DType value = DType::f32;
};
template <>
struct dtype_of<double> {
    static constexpr DType value = DType::f64;
};

inline std::size_t dtype_size(DType d) { return d == DType::f32 ? 4 : 8; }

inline std::string dtype_name(DType d) { return d == DType::f32 ? "f32" : "f64"; }

inline DType dtype_from_name(const std::string& s) {
    if (s == "f32") return DType::f32;
    if (s == "f64") return DType::f64;
    throw ArgumentError("unknown dtype: " + s);
}

// Keeps large tensor buffers on the heap free list instead of cycling them
// through mmap/munmap; called once from long-running entry points.
void tune_allocator();

}  // namespace ssr
