#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace schac {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A value lies outside the domain of a function (|s| > 1 for the logarithmic
/// potential, |phi| > 1 for the noise coefficients).
class DomainError : public Error {
public:
  DomainError(const std::string &what, std::size_t index, double value)
      : Error(what), index_(index), value_(value) {}

  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

private:
  std::size_t index_;
  double value_;
};

/// NaN or Inf found in a field.
class NonFiniteError : public Error {
public:
  NonFiniteError(const std::string &what, std::size_t index)
      : Error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// An iterative scalar solve did not reach its tolerance.
class NumericalError : public Error {
public:
  NumericalError(const std::string &what, double input, double lambda,
                 double residual)
      : Error(what), input_(input), lambda_(lambda), residual_(residual) {}

  double input() const noexcept { return input_; }
  double lambda() const noexcept { return lambda_; }
  double residual() const noexcept { return residual_; }

private:
  double input_;
  double lambda_;
  double residual_;
};

/// Caller broke a documented precondition (non-zero mean passed to N, grid
/// mismatch, inconsistent parameters).
class ContractViolation : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace schac
