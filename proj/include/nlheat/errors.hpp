#pragma once

#include <stdexcept>
#include <string>

namespace nlheat {

// Precondition or argument violation on a public entry point.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested operation is not defined for the given kernel family / mode.
class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Non-finite values, degenerate kernels, exhausted budgets.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nlheat
