#pragma once

#include <stdexcept>
#include <string>

namespace aonkit {

// Operand dimensions do not agree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite or otherwise unusable input values.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A weight whose normaliser collapsed to zero (e.g. an all-zero matrix).
class DegenerateWeightError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// On-disk data that does not follow the expected layout.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace aonkit
