#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridrisk {

// Base of every error the library raises. Callers that only care about
// "did the run fail" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

class DisconnectedGrid : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NoDemand : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// No dispatch exists even with all demand shed.
class Unstable : public Error {
 public:
  using Error::Error;
};

class MisalignedHours : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SharesNotNormalized : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnbalancedTables : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BaselineMismatch : public Error {
 public:
  using Error::Error;
};

class MissingCosts : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegeneratePeaks : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace gridrisk
