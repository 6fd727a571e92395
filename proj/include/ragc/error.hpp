#pragma once

#include <stdexcept>
#include <string>

namespace ragc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or hyperparameter.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input values violate a data invariant (non-finite value, bad label...).
class DataError : public Error {
 public:
  using Error::Error;
};

class LabelError : public DataError {
 public:
  using DataError::DataError;
};

/// Unrecognized or damaged file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A graph violates a structural invariant.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class BatchTooSmallError : public Error {
 public:
  using Error::Error;
};

/// backward() invoked on a tape that was already consumed.
class StaleTapeError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a function contract (e.g. non-scalar loss).
class ContractError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ragc
