#pragma once

#include <stdexcept>
#include <string>

namespace hipcap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Caller-supplied data violates a documented precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// An object is used before it reached the required state.
class StateError : public Error {
public:
    using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Model or parameter configuration is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File-system or serialization failure; the message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hipcap
