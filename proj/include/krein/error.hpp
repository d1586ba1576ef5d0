#pragma once

#include <stdexcept>
#include <string>

namespace krein {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's stated precondition (shape, hermiticity,
/// dissipativity, branch cut, parameter constraints).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular or too ill-conditioned.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure (eigensolver, quadrature, epsilon limit,
/// phase continuation) exhausted its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace krein
