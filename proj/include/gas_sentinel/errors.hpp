#pragma once

#include <stdexcept>
#include <string>

namespace gas_sentinel {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an invalid argument. The CLI maps this family to exit code 1.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

class ShapeError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

class RangeError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Sensor-model least-squares fit could not be carried out.
class FitError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset, model or record file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace gas_sentinel
