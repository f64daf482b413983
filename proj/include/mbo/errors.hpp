#pragma once

#include <stdexcept>
#include <string>

namespace mbo {

// Malformed input data (bad row, bad schema, bad file contents).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that violates a domain rule (unknown order ID,
// timestamp regression, degenerate distribution, shape mismatch).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or CLI arguments.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or unreadable file.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mbo
