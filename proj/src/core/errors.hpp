#pragma once

#include <stdexcept>

namespace ispi {

/// Pattern/mask/image shapes disagree.
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operation called on an object in the wrong state (e.g. finalize with
/// no accumulated pairs).
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Malformed or inconsistent experiment configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Filesystem or format failure while reading/writing artifacts.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ispi
