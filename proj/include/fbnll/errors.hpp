#pragma once

#include <stdexcept>
#include <string>

namespace fbnll {

/// Invalid or inconsistent configuration (bad counts, divisibility, ranges).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};

/// File-level failures: missing files, malformed records, bad magic/version.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error("io: " + msg) {}
};

/// Matrix/vector dimension disagreements between inputs.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error("shape: " + msg) {}
};

/// Non-finite values or other numeric breakdowns.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error("numeric: " + msg) {}
};

/// Not enough samples to satisfy a request (validation split, noise budget, ...).
class InsufficientSamplesError : public std::runtime_error {
public:
    explicit InsufficientSamplesError(const std::string& msg)
        : std::runtime_error("insufficient samples: " + msg) {}
};

}  // namespace fbnll
