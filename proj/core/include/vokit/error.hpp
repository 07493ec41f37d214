#pragma once

#include <stdexcept>
#include <string>

namespace vokit {

/// Base class for every failure raised by the toolkit. The CLI maps these to
/// exit status 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Input violates a domain-type invariant (non-finite entry, bad intrinsics,
/// non-rotation matrix, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Matrix Fisher parameters whose mode is not unique.
class DegenerateParameters : public Error {
 public:
  using Error::Error;
};

class InsufficientOverlap : public Error {
 public:
  using Error::Error;
};

class InvalidDenominator : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. Carries the 1-based line number when the format is
/// line oriented (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vokit
