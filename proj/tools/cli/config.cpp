#include "cli.hpp"

#include "wcharvest/errors.hpp"

#include <charconv>
#include <cmath>
#include <string_view>

namespace wcharvest::cli {

namespace {

double parse_number(std::string_view text, std::string_view what) {
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    while (!text.empty() && text.back() == ' ') {
        text.remove_suffix(1);
    }
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw InputError("cannot parse " + std::string(what) + " from `" + std::string(text) + "`");
    }
    return value;
}

} // namespace

NominalModel parse_nominal_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw InputError("nominal spec `" + spec + "` must look like exp:RATE, uniform:UPPER or table:PATH");
    }
    const std::string key = spec.substr(0, colon);
    const std::string value = spec.substr(colon + 1);
    if (key == "exp") {
        return NominalModel::exponential(parse_number(value, "exponential rate"));
    }
    if (key == "uniform") {
        return NominalModel::uniform(parse_number(value, "uniform upper end"));
    }
    if (key == "table") {
        return NominalModel::load_table(value);
    }
    throw InputError("unknown nominal family `" + key + "` (exp, uniform, table)");
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto first = text.find(':');
        const auto second = text.find(':', first + 1);
        if (second == std::string::npos || text.find(':', second + 1) != std::string::npos) {
            throw InputError("grid `" + text + "` must be start:stop:step");
        }
        const double start = parse_number(std::string_view(text).substr(0, first), "grid start");
        const double stop = parse_number(std::string_view(text).substr(first + 1, second - first - 1), "grid stop");
        const double step = parse_number(std::string_view(text).substr(second + 1), "grid step");
        if (!(step > 0.0) || stop < start) {
            throw InputError("grid `" + text + "` needs step > 0 and stop >= start");
        }
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (count > 10000000) {
            throw InputError("grid `" + text + "` has too many points");
        }
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(start + static_cast<double>(i) * step);
        }
        return out;
    }
    std::string_view rest(text);
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(parse_number(rest.substr(0, comma), "grid value"));
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    return out;
}

} // namespace wcharvest::cli
