#pragma once

#include <stdexcept>
#include <string>

namespace distreg {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV schema, ids, targets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Feature dimensionality does not match between two operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization failed even after the maximum diagonal jitter.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, hyperparameter, or model file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace distreg
