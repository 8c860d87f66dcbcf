#pragma once

#include <stdexcept>
#include <string>

namespace spnp {

/// Invalid argument to a library call (bad extents, unsupported order, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration text could not be parsed or a value is out of range.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

/// Base of all linear-solver failures.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public SolverError {
 public:
  using SolverError::SolverError;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, long iterations, double residual)
      : SolverError(what), iterations_(iterations), residual_(residual) {}
  long iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  long iterations_;
  double residual_;
};

/// A structural property of the scheme was violated (positivity, mass,
/// energy, solvability of the auxiliary-variable update, ...).
class StructuralError : public std::runtime_error {
 public:
  StructuralError(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Right-hand side of a pure-Neumann problem is not orthogonal to constants.
class CompatibilityError : public StructuralError {
 public:
  using StructuralError::StructuralError;
};

/// A concentration became non-positive or non-finite.
class PositivityError : public StructuralError {
 public:
  using StructuralError::StructuralError;
};

}  // namespace spnp
