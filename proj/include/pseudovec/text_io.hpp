#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include "pseudovec/errors.hpp"

namespace pseudovec {

// Shortest decimal form that parses back to the identical double. All
// persisted floats go through this so artifact files round-trip
// bit-exactly and reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

inline double parse_double(std::string_view s, std::string_view context) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw FormatError("expected a number, got '" + std::string(s) + "' in " +
                          std::string(context));
    return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view context) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw FormatError("expected an integer, got '" + std::string(s) + "' in " +
                          std::string(context));
    return v;
}

} // namespace pseudovec
