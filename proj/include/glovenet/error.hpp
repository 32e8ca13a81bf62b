#pragma once

#include <stdexcept>
#include <string>

namespace glovenet {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or dataset dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An index (usually a class label) is outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Caller passed arguments that can never be valid.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A precondition of the operation does not hold for the given data.
class ContractError : public Error {
 public:
  using Error::Error;
};

// On-disk artifact is missing, truncated or malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Loaded data is well formed but violates a dataset invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace glovenet
