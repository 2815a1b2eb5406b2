#pragma once

#include <stdexcept>
#include <string>

namespace homqd {

// Invalid configuration or out-of-range input. Maps to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to produce a usable answer. Maps to exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be read, parsed or written. Maps to exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace homqd
