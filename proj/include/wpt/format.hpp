#pragma once

#include <charconv>
#include <string>

namespace wpt {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

}  // namespace wpt
