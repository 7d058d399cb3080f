#pragma once

#include <stdexcept>
#include <string>

namespace lcband {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The sample is too small for the dyadic interval system to have a block.
class TooFewSamples : public Error {
 public:
  using Error::Error;
};

/// Two selected order statistics coincide (ties in the data).
class DuplicateDesignPoint : public Error {
 public:
  using Error::Error;
};

class InvalidAlpha : public DomainError {
 public:
  using DomainError::DomainError;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class TooFewKnots : public Error {
 public:
  using Error::Error;
};

}  // namespace lcband
