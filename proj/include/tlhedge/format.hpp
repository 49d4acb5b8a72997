#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace tlhedge {

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("cannot format number");
    return std::string(buf, ptr);
}

/// Whole-string parse; throws std::invalid_argument naming `what`.
inline double parse_double(std::string_view text, std::string_view what = "number") {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    return v;
}

}  // namespace tlhedge
