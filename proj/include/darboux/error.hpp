#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace darboux {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Unbound symbol, non-finite intermediate, or smoothness violation during numeric evaluation.
class EvalError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public EvalError {
 public:
  using EvalError::EvalError;
};

/// Raised when probing finds a rank that is not constant, or cannot find a probe point.
class RankError : public Error {
 public:
  RankError(const std::string& message, std::vector<double> witness = {})
      : Error(message), witness_(std::move(witness)) {}
  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  std::vector<double> witness_;
};

class ChartMismatch : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class DomainViolation : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

/// Cauchy data fails the integral-curve or non-characteristic conditions.
class CharacteristicError : public Error {
 public:
  using Error::Error;
};

/// Malformed problem file or registry lookup failure.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace darboux
