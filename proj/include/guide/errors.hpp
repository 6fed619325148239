#pragma once

#include <stdexcept>
#include <string>

namespace guide {

// Base of all guide errors so callers (and the CLI) can map them uniformly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line and, when known, the field
// that failed, so diagnostics can point at the offending record.
class ParseError : public Error {
 public:
  ParseError(std::string message, int line = -1, std::string field = {})
      : Error(format(message, line, field)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& message, int line, const std::string& field) {
    std::string out;
    if (line >= 1) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + message;
  }
  int line_;
  std::string field_;
};

// A structurally valid value that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Request names a task for which the registry has no usable candidates.
class UnknownTaskError : public Error {
 public:
  using Error::Error;
};

// Simulated meter asked to read backwards in time.
class TimeRegressionError : public Error {
 public:
  using Error::Error;
};

// Negative energy delta: the meter's counter went backwards.
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

// Overlapping executions on the single simulated GPU.
class SchedulingError : public Error {
 public:
  using Error::Error;
};

// Bad policy or runtime configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace guide
