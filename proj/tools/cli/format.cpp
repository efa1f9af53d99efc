#include "cli.hpp"

#include <cmath>
#include <cstdio>

namespace wcharvest::cli {

std::string format_real(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
    return buffer;
}

std::string format_optional(const std::optional<double>& value) { return value ? format_real(*value) : std::string{}; }

} // namespace wcharvest::cli
