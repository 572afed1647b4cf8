#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The instance admits no positive benefit (e.g. total activity strength is zero).
class DegenerateInstanceError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration requested on an instance larger than the configured guard.
class GuardExceededError : public Error {
 public:
  using Error::Error;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cam
