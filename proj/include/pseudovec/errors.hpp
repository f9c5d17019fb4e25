#pragma once

#include <stdexcept>

namespace pseudovec {

// Error taxonomy shared by the library and the CLI. The CLI maps
// validation-time failures (Io/Format/Config/Argument/Coverage) to exit
// code 1 and runtime numerical failures to exit code 2.

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Too few benchmark pairs survive vocabulary filtering.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN/Inf tripwire during training.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pseudovec
