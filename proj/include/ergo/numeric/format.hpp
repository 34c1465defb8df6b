#pragma once

#include <charconv>
#include <string>

namespace ergo {

// Shortest decimal form that parses back to the identical double. Output
// files built from this are byte-stable across runs by construction.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace ergo
