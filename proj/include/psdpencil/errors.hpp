#pragma once

#include <stdexcept>
#include <string>

namespace psdpencil {

/// Shapes or index sets incompatible with the operation.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the range where the operation is defined.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Caller-supplied structure (partition, factorization) does not hold.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A theorem-backed invariant failed. This always indicates a bug.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrackingError : NumericalError {
  using NumericalError::NumericalError;
};

struct DivergenceError : NumericalError {
  using NumericalError::NumericalError;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace psdpencil
