#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rkdecouple {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (bad key, |zeta| > 1, bad size, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A rational function was evaluated at (or numerically on top of) a pole.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// An operator expected to be symmetric positive definite is not.
class NotSpdError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (CLI flags, config file, scheme settings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver exceeded its iteration budget. Carries the norm history.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace rkdecouple
