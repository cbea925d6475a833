#pragma once

#include <stdexcept>
#include <string>

namespace mtt {

/// Base of every error raised by the library. The C API maps each subclass
/// onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model parameter is outside its admissible range (e.g. a non-positive scale).
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// Observations are malformed (NaN points, empty data where some is needed).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Data contradict a structural assumption of the requested evaluator.
class ModelViolationError : public Error {
 public:
  using Error::Error;
};

/// Every latent configuration has zero posterior weight.
class InconsistentDataError : public Error {
 public:
  using Error::Error;
};

/// A clutter density vanishes where a ratio against it is required.
class SupportViolationError : public Error {
 public:
  using Error::Error;
};

/// Enumeration would exceed the configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment or Monte Carlo configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// All particle weights vanished during sequential Monte Carlo.
class NumericalCollapseError : public Error {
 public:
  using Error::Error;
};

/// The objective is non-finite on the whole search bracket.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtt
