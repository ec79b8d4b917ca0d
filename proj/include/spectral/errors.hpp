#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spectral {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::int64_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::int64_t line() const noexcept { return line_; }

 private:
  std::int64_t line_;
};

// Argument outside the documented domain (negative weight, l > n, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke an API contract (dimension mismatch, length mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Gram matrix of a Rayleigh-Ritz basis is too ill-conditioned to use.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

// The eigenvector embedding cannot be turned into a partition.
class AssignmentError : public Error {
 public:
  using Error::Error;
};

// PR/PP requested when no qualifying vertex pair exists.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace spectral
