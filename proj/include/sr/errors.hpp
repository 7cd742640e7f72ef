#pragma once

#include <stdexcept>
#include <string>

namespace sr {

/// I/O failure: missing file, unreadable or malformed format.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or arguments.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sr
