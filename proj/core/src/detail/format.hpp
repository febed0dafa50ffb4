#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace isoprob::detail {

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;  // 32 bytes always suffice for the shortest form
    return std::string(buf, ptr);
}

}  // namespace isoprob::detail
