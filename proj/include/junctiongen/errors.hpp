#pragma once

#include <stdexcept>
#include <string>

namespace junctiongen {

/// Bad user input: unknown ids, out-of-range options, malformed config.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent data: schema violations, broken geometry.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace junctiongen
