#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ginet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes, sizes or orders that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A materialization (group elements, tuple space, dense matrix) would exceed its cap.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::size_t cap)
      : Error(what + " (cap = " + std::to_string(cap) + ")"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// Malformed group or polynomial input. Carries the 1-based line number (0 if unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A polynomial handed to an invariant-only routine is not invariant.
class NotInvariant : public Error {
 public:
  using Error::Error;
};

/// Gradient descent diverged or a gadget missed its accuracy target.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, double best_error)
      : Error(what), best_error_(best_error) {}
  double best_error() const noexcept { return best_error_; }

 private:
  double best_error_;
};

}  // namespace ginet
