// errors.hpp - exception types; the CLI maps each family to its own exit code

#pragma once

#include <stdexcept>
#include <string>

namespace heom {

// Invalid or inconsistent input (config files, domain-type invariants).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Integration failure, non-finite values, invalid physical state.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Requested problem exceeds a configured size limit.
class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Auto Matsubara selection hit the mode cap before converging.
class TruncationError : public CapacityError {
  public:
    using CapacityError::CapacityError;
};

class InvalidStateError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

} // namespace heom
