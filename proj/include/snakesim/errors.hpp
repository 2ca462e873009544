#pragma once

#include <stdexcept>
#include <string>

namespace snakesim {

// Base for everything thrown by the library. what() is a single line suitable
// for the CLI's machine-readable error report.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

// A caller passed a value outside the documented domain of an operation.
class InputDomainError : public Error {
public:
  explicit InputDomainError(const std::string& msg)
      : Error("input_domain", msg) {}
};

// Numerical degeneracy (non-finite matrix entries, failed factorization).
class NumericalError : public Error {
public:
  NumericalError(const std::string& msg, double smallest_eigenvalue = 0.0)
      : Error("numerical", msg), smallest_eigenvalue_(smallest_eigenvalue) {}
  double smallest_eigenvalue() const { return smallest_eigenvalue_; }

private:
  double smallest_eigenvalue_;
};

// File / parse problems in configs, trajectories, series.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error("io", msg) {}
};

}  // namespace snakesim
