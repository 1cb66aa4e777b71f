#pragma once

#include <stdexcept>
#include <string>

namespace carots {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor / matrix dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A metric that is undefined for the given labels (e.g. a single class).
class UndefinedMetricError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// NaN / divergence during simulation or training (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace carots
