#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace floodsom {

/// Shortest decimal form that parses back to exactly `v`.
inline void append_number(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

inline std::string format_number(double v) {
    std::string s;
    append_number(s, v);
    return s;
}

/// Whole token must be a number.
inline std::optional<double> parse_number(std::string_view token) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
    return v;
}

}  // namespace floodsom
