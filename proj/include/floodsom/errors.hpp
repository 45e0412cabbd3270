#pragma once

#include <stdexcept>
#include <string>

namespace floodsom {

/// Invalid configuration values (dimensions, SOM geometry, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input files. The message names the offending line where known.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Arguments that violate an operation's preconditions.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inflow-location sampling could not satisfy its constraints.
class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace floodsom
