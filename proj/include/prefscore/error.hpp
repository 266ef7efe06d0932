#pragma once

#include <stdexcept>
#include <string>

namespace prefscore {

// Base of every error the library raises. kind() is a stable machine-readable
// tag used by the CLI error report.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

// Dimension or metric-name mismatches against a MetricSchema.
class SchemaError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "schema_error"; }
};

// Malformed or inconsistent input data (CSV rows, labels, record sets).
class DataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "data_error"; }
};

// Invalid configuration values or precondition violations on arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

// Non-finite values produced during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric_error"; }
};

}  // namespace prefscore
