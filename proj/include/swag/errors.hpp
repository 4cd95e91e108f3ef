#pragma once

#include <stdexcept>
#include <string>

namespace swag {

/// Violated precondition or shape contract (caller bug).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid or inconsistent configuration values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A dataset file is missing or unreadable.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A dataset file is readable but malformed.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative method failed, or a NaN showed up during training.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace swag
