#pragma once

#include <stdexcept>
#include <string>

namespace beammem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: bad sizes, unordered grids, invalid parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function (e.g. negative age s).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (non-convergence, NaN, exhausted budget).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A structural hypothesis on the memory kernel does not hold.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a pole of a transform.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A tabulated kernel is sampled too coarsely for the requested check.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Not enough usable rows inside a fit window.
class WindowError : public Error {
 public:
  using Error::Error;
};

/// Input trace does not satisfy the precondition of an analysis.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace beammem
