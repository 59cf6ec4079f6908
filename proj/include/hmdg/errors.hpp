#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hmdg {

/// Bad argument to a library call (wrong sizes, unsupported kinds, nx = 0, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed mesh or config text. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration (dt not dividing T, unknown key, time step too large, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of a solve step does not hold (e.g. incompatible source).
class PreconditionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Singular element-local block during assembly.
class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(const std::string& what, std::ptrdiff_t cell)
      : std::runtime_error(what + " (cell " + std::to_string(cell) + ")"), message_(what), cell_(cell) {}
  std::ptrdiff_t cell() const { return cell_; }
  /// The message without the cell suffix.
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::ptrdiff_t cell_;
};

/// Sparse factorization failure or residual above tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::ptrdiff_t pivot = -1, double residual = -1.0)
      : std::runtime_error(what), pivot_(pivot), residual_(residual) {}
  std::ptrdiff_t pivot() const { return pivot_; }
  double residual() const { return residual_; }

 private:
  std::ptrdiff_t pivot_;
  double residual_;
};

}  // namespace hmdg
