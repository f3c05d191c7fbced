#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace unstart {

/// Base of every error raised by the core library. The C API maps each
/// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (e.g. position outside the engine).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a structural precondition (mismatched grids, missing center path).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Nonpositive density or pressure produced by the flow solver.
class InvalidStateError : public Error {
 public:
  InvalidStateError(const std::string& what, std::ptrdiff_t cell, double time)
      : Error(what), cell_(cell), time_(time) {}
  std::ptrdiff_t cell() const { return cell_; }
  double time() const { return time_; }

 private:
  std::ptrdiff_t cell_;
  double time_;
};

/// Uniform time step violates the CFL bound during a controlled run.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

class SpinUpError : public Error {
 public:
  using Error::Error;
};

/// No feasible starting point could be constructed for the action minimization.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems; carries the offending line (1-based, 0 if unknown).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace unstart
