#pragma once

#include <stdexcept>
#include <string>

namespace ddetc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape mismatch, non-finite entries, out-of-range
/// parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// The Newton system of the interior-point solver could not be solved even
/// after regularization.
class SolverBreakdown : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddetc
