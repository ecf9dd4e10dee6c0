#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

// Exit codes used by the command line tool.
enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kSchema = 2,
  kCalibration = 3,
  kNumeric = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kFailure; }
};

// Malformed or out-of-range values passed to an operation.
class InputError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kSchema; }
};

// Files or records whose shape does not match what the measure needs.
class SchemaError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kSchema; }
};

// Inconsistent configuration, e.g. critical values calibrated for another setup.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kSchema; }
};

// Monitoring past the horizon the critical values were calibrated for.
class HorizonError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kSchema; }
};

class EmptyReportError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kSchema; }
};

class CalibrationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kCalibration; }
};

// Quadrature or root-finding failure.
class NumericError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumeric; }
};

}  // namespace sentinel
