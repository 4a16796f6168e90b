#pragma once

#include <cstddef>

namespace ssr::io {

// Peak resident set size (VmHWM) of the current process in bytes; 0 when the
// value cannot be read.
std::size_t peak_rss_bytes();

}  // namespace ssr::io
