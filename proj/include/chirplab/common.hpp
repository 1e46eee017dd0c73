#ifndef CHIRPLAB_COMMON_HPP
#define CHIRPLAB_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chirplab {

/// Bad input data or parameters (rejected preconditions, malformed rows, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem-level failures: missing files, unwritable paths, truncated reads.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent configuration (JSON configs, manifests, CLI flags).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Formats a double with 17 significant digits, enough for an exact
/// parse-back of any IEEE-754 double. All text formats in this project
/// (embedding CSVs, histories, predictions) use this formatting.
std::string format_double(double v);

/// Parses a decimal float. "-inf" is accepted only when allow_neg_inf is set.
/// Throws ValidationError on NaN, empty, or trailing garbage.
double parse_double(std::string_view token, bool allow_neg_inf, std::string_view context);

/// FNV-1a 64-bit hash, used for artifact fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hex string of a 64-bit hash (16 lowercase digits).
std::string hash_hex(std::uint64_t h);

}  // namespace chirplab

#endif
