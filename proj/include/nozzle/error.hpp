#pragma once

#include <stdexcept>
#include <string>

namespace nozzle {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A constructed object (geometry, config) violates one of its invariants.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical machinery failed where it is expected to succeed.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration document rejected; the message carries the offending key.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A post-processing precondition (e.g. column monotonicity) does not hold.
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nozzle
