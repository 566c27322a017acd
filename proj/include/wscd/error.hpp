#pragma once

#include <stdexcept>
#include <string>

namespace wscd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong lifecycle state (e.g. backward twice).
class StateError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced, or a training loss diverged.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed user input: words, files, checkpoints.
class InputError : public Error {
 public:
  using Error::Error;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// Well-formed input whose content contradicts expectations (e.g. manifest).
class DataError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wscd
