#pragma once

#include <stdexcept>
#include <string>

namespace qmarket {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected by a precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Dimension cap exceeded or dimensions do not match.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An iterative routine (eigen-solver, Newton path) failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Two independent computational routes disagree beyond tolerance.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmarket
