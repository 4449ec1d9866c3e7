#pragma once

#include <stdexcept>
#include <string>

namespace kghdmr {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments (CLI exit code 2).
class ConfigError : public Error {
public:
  using Error::Error;
};

// A design point component lies outside its variable's bounds.
class BoundsError : public ConfigError {
public:
  BoundsError(const std::string &variable, const std::string &what)
      : ConfigError(what), variable_(variable) {}
  const std::string &variable() const noexcept { return variable_; }

private:
  std::string variable_;
};

// A unit-cube coordinate lies outside [0, 1].
class RangeError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

// The objective's evaluation budget is spent (CLI exit code 3).
class BudgetExhausted : public Error {
public:
  using Error::Error;
};

// Derived heat-sink geometry has non-positive fin spacing.
class InfeasibleGeometry : public Error {
public:
  using Error::Error;
};

// Numerical failures (CLI exit code 4).
class NumericalError : public Error {
public:
  using Error::Error;
};

class DegenerateData : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class UndefinedMetric : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// Persisted model could not be read (CLI exit code 5).
class ModelFormatError : public Error {
public:
  using Error::Error;
};

} // namespace kghdmr
