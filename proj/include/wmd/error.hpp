#pragma once

#include <stdexcept>
#include <string>

namespace wmd {

/// Input violates a documented precondition (non-positive inductance, rho outside (0,1), ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside an engine (singular mesh matrix, non-invertible inductance block).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration or file-format problem (bad JSON, unknown key, unreadable path).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wmd
