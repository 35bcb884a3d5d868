#pragma once

#include <stdexcept>
#include <string>

namespace nnddm {

/// Cell Jacobian is singular (or numerically so).
class DegenerateCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse LU hit a zero pivot. `pivot()` is the offending column of the
/// reduced system, or -1 when the backend did not report one.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, long pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Malformed model/config/dataset text. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line), message_(what) {}
  long line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  long line_;
  std::string message_;
};

}  // namespace nnddm
