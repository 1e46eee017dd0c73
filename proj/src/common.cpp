#include "chirplab/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace chirplab {

std::string format_double(double v) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

double parse_double(std::string_view token, bool allow_neg_inf, std::string_view context) {
    if (token == "-inf") {
        if (!allow_neg_inf) {
            throw ValidationError(std::string(context) + ": '-inf' is not allowed here");
        }
        return -std::numeric_limits<double>::infinity();
    }
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || token.empty()) {
        throw ValidationError(std::string(context) + ": cannot parse number '" +
                              std::string(token) + "'");
    }
    if (std::isnan(value)) {
        throw ValidationError(std::string(context) + ": NaN is not allowed");
    }
    if (std::isinf(value)) {
        throw ValidationError(std::string(context) + ": infinite value '" + std::string(token) +
                              "' (only the literal '-inf' token is accepted, in logit columns)");
    }
    return value;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

}  // namespace chirplab
