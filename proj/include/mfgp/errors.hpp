#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfgp {

/// Bad shapes, empty datasets, invalid hyperparameters or malformed specs.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cholesky failure after maximal jitter, non-finite objective or gradient.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number when known.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, std::size_t line)
      : InputError("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mfgp
